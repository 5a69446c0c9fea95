#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "voxelopt/cost_volume.hpp"
#include "voxelopt/entropy.hpp"
#include "voxelopt/parallel.hpp"
#include "voxelopt/types.hpp"

namespace voxelopt {

/// Kernel selection for the separable Gaussian passes: one sigma everywhere,
/// or a per-receiving-voxel sigma taken from a borrowed SigmaMap (the map must
/// outlive the spec). Kernels truncate at ceil(3*sigma) taps and are
/// renormalized to sum 1 at every application point; taps outside the grid
/// replicate the boundary value. Sigma below 1e-3 degenerates to the identity.
struct GaussianSpec {
    double iso = 0.0;
    const SigmaMap* map = nullptr;

    static GaussianSpec isotropic(double sigma) {
        require(std::isfinite(sigma) && sigma >= 0.0, "gaussian: sigma must be finite and >= 0");
        GaussianSpec s;
        s.iso = sigma;
        return s;
    }
    static GaussianSpec adaptive(const SigmaMap& m) {
        GaussianSpec s;
        s.map = &m;
        return s;
    }
    bool is_adaptive() const { return map != nullptr; }
};

namespace detail {

constexpr double kSigmaFloor = 1e-3;  // below this the kernel is a delta
constexpr int kMaxKernelRadius = 255;

/// One separable pass along `axis` (0=x,1=y,2=z) over `channels`-interleaved
/// data. The receiving voxel's sigma selects the kernel; weights are computed
/// with a single exp per voxel (w_t = q^(t^2), q = exp(-1/(2 sigma^2))).
template <class SigmaFn>
void gaussian_pass(const double* src, double* dst, const Dims& dims, int channels, int axis,
                   SigmaFn&& sigma_at) {
    const int len = axis == 0 ? dims.x : (axis == 1 ? dims.y : dims.z);
    const std::int64_t stride =
        axis == 0 ? 1 : (axis == 1 ? std::int64_t(dims.x) : std::int64_t(dims.x) * dims.y);

    parallel_for(dims.voxel_count(), [&](std::int64_t lo, std::int64_t hi) {
        double w[kMaxKernelRadius + 1];
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const double sigma = sigma_at(idx);
            double* out = dst + idx * channels;
            if (sigma < kSigmaFloor) {
                const double* in = src + idx * channels;
                for (int c = 0; c < channels; ++c) out[c] = in[c];
                continue;
            }
            int radius = int(std::ceil(3.0 * sigma));
            if (radius > kMaxKernelRadius) radius = kMaxKernelRadius;

            const double q = std::exp(-1.0 / (2.0 * sigma * sigma));
            const double q2 = q * q;
            double wt = 1.0, m = q, wsum = 1.0;
            w[0] = 1.0;
            for (int t = 1; t <= radius; ++t) {
                wt *= m;
                m *= q2;
                w[t] = wt;
                wsum += 2.0 * wt;
            }

            const int pos = axis == 0 ? int(idx % dims.x)
                            : (axis == 1 ? int((idx / dims.x) % dims.y)
                                         : int(idx / (std::int64_t(dims.x) * dims.y)));
            const std::int64_t line_origin = idx - std::int64_t(pos) * stride;
            for (int c = 0; c < channels; ++c) out[c] = 0.0;
            for (int t = -radius; t <= radius; ++t) {
                int p = pos + t;
                if (p < 0) p = 0;
                if (p >= len) p = len - 1;
                const double* in = src + (line_origin + std::int64_t(p) * stride) * channels;
                const double weight = w[t < 0 ? -t : t];
                for (int c = 0; c < channels; ++c) out[c] += weight * in[c];
            }
            const double inv = 1.0 / wsum;
            for (int c = 0; c < channels; ++c) out[c] *= inv;
        }
    });
}

inline void apply_separable(std::vector<double>& values, const Dims& dims, int channels,
                            const GaussianSpec& spec) {
    if (spec.is_adaptive()) {
        require(spec.map->dims == dims, "gaussian: sigma map dims " + to_string(spec.map->dims) +
                                            " do not match target dims " + to_string(dims));
    }
    std::vector<double> tmp(values.size());
    const double* const sigmas = spec.is_adaptive() ? spec.map->values.data() : nullptr;
    const double iso = spec.iso;
    for (int axis = 0; axis < 3; ++axis) {
        const double* src = (axis % 2 == 0) ? values.data() : tmp.data();
        double* dst = (axis % 2 == 0) ? tmp.data() : values.data();
        if (sigmas)
            gaussian_pass(src, dst, dims, channels, axis, [&](std::int64_t i) { return sigmas[i]; });
        else
            gaussian_pass(src, dst, dims, channels, axis, [&](std::int64_t) { return iso; });
    }
    values.swap(tmp);  // odd number of passes: result ends in tmp
}

}  // namespace detail

/// Single 1D Gaussian pass along one axis over channel-interleaved values.
inline std::vector<double> gaussian_1d_pass(const std::vector<double>& values, const Dims& dims,
                                            int channels, int axis, const GaussianSpec& spec) {
    require(channels >= 1 && axis >= 0 && axis <= 2, "gaussian_1d_pass: bad channels/axis");
    require(std::int64_t(values.size()) == dims.voxel_count() * channels,
            "gaussian_1d_pass: value length does not match dims");
    if (spec.is_adaptive())
        require(spec.map->dims == dims, "gaussian_1d_pass: sigma map dims mismatch");
    std::vector<double> out(values.size());
    const double* const sigmas = spec.is_adaptive() ? spec.map->values.data() : nullptr;
    const double iso = spec.iso;
    if (sigmas)
        detail::gaussian_pass(values.data(), out.data(), dims, channels, axis,
                              [&](std::int64_t i) { return sigmas[i]; });
    else
        detail::gaussian_pass(values.data(), out.data(), dims, channels, axis,
                              [&](std::int64_t) { return iso; });
    return out;
}

/// Smooths each vector component along x, then y, then z. In adaptive mode
/// the receiving voxel's sigma sets the kernel width, so a voxel with
/// sigma(x) = 0 keeps its value exactly regardless of its neighbors.
inline DisplacementField filter_field(const DisplacementField& v, const GaussianSpec& spec) {
    DisplacementField out = v;
    detail::apply_separable(out.data, v.dims, 3, spec);
    return out;
}

/// Spatial smoothing of every offset channel of a cost volume, producing the
/// pre-filtered C-tilde fed to the discrete solver.
inline CostVolume filter_cost(const CostVolume& c, const GaussianSpec& spec) {
    CostVolume out = c;
    detail::apply_separable(out.costs, c.dims, c.offsets_per_voxel(), spec);
    return out;
}

}  // namespace voxelopt
