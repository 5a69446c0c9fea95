#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "voxelopt/parallel.hpp"
#include "voxelopt/types.hpp"

namespace voxelopt {

namespace detail {

/// Corner indices and fractional weights of the trilinear stencil at a point.
/// The point is clamped to [0, dim-1] per axis first (replicate padding), so
/// every query is valid. On exact lattice nodes all fractions are 0 and the
/// low corner alone carries the value.
struct TrilinearStencil {
    int x0, y0, z0;
    int x1, y1, z1;
    double fx, fy, fz;
    bool on_lattice;
};

inline TrilinearStencil make_stencil(const Dims& d, double px, double py, double pz) {
    const auto clamp_axis = [](double p, int n) { return std::min(std::max(p, 0.0), double(n - 1)); };
    const double cx = clamp_axis(px, d.x);
    const double cy = clamp_axis(py, d.y);
    const double cz = clamp_axis(pz, d.z);

    TrilinearStencil s;
    s.x0 = std::min(int(cx), d.x - 1);
    s.y0 = std::min(int(cy), d.y - 1);
    s.z0 = std::min(int(cz), d.z - 1);
    s.fx = cx - s.x0;
    s.fy = cy - s.y0;
    s.fz = cz - s.z0;
    s.x1 = std::min(s.x0 + 1, d.x - 1);
    s.y1 = std::min(s.y0 + 1, d.y - 1);
    s.z1 = std::min(s.z0 + 1, d.z - 1);
    s.on_lattice = (s.fx == 0.0 && s.fy == 0.0 && s.fz == 0.0);
    return s;
}

inline double lerp(double a, double b, double t) { return a + t * (b - a); }

/// Interpolates `channels` interleaved values at a point into out[0..channels).
inline void sample_channels(const double* data, const Dims& d, int channels,
                            double px, double py, double pz, double* out) {
    const TrilinearStencil s = make_stencil(d, px, py, pz);
    if (s.on_lattice) {
        const double* v = data + voxel_index(d, s.x0, s.y0, s.z0) * channels;
        for (int c = 0; c < channels; ++c) out[c] = v[c];
        return;
    }
    const std::int64_t i000 = voxel_index(d, s.x0, s.y0, s.z0) * channels;
    const std::int64_t i100 = voxel_index(d, s.x1, s.y0, s.z0) * channels;
    const std::int64_t i010 = voxel_index(d, s.x0, s.y1, s.z0) * channels;
    const std::int64_t i110 = voxel_index(d, s.x1, s.y1, s.z0) * channels;
    const std::int64_t i001 = voxel_index(d, s.x0, s.y0, s.z1) * channels;
    const std::int64_t i101 = voxel_index(d, s.x1, s.y0, s.z1) * channels;
    const std::int64_t i011 = voxel_index(d, s.x0, s.y1, s.z1) * channels;
    const std::int64_t i111 = voxel_index(d, s.x1, s.y1, s.z1) * channels;
    for (int c = 0; c < channels; ++c) {
        const double c00 = lerp(data[i000 + c], data[i100 + c], s.fx);
        const double c10 = lerp(data[i010 + c], data[i110 + c], s.fx);
        const double c01 = lerp(data[i001 + c], data[i101 + c], s.fx);
        const double c11 = lerp(data[i011 + c], data[i111 + c], s.fx);
        out[c] = lerp(lerp(c00, c10, s.fy), lerp(c01, c11, s.fy), s.fz);
    }
}

}  // namespace detail

/// Trilinear interpolation of all channels at a point given in voxel
/// coordinates; out-of-range coordinates clamp to the boundary.
inline void trilinear_sample(const FeatureVolume& vol, const Vec3& p, double* out) {
    detail::sample_channels(vol.data.data(), vol.dims, vol.channels, p.x, p.y, p.z, out);
}

inline std::vector<double> trilinear_sample(const FeatureVolume& vol, const Vec3& p) {
    std::vector<double> out(std::size_t(vol.channels));
    trilinear_sample(vol, p, out.data());
    return out;
}

/// Component-wise trilinear sample of a displacement field.
inline Vec3 sample_field(const DisplacementField& u, const Vec3& p) {
    double out[3];
    detail::sample_channels(u.data.data(), u.dims, 3, p.x, p.y, p.z, out);
    return {out[0], out[1], out[2]};
}

/// output(x) = m(x + u(x)), sampled trilinearly with boundary clamping.
inline FeatureVolume warp(const FeatureVolume& m, const DisplacementField& u) {
    require(m.dims == u.dims, "warp: volume dims " + to_string(m.dims) +
                                  " do not match field dims " + to_string(u.dims));
    FeatureVolume out;
    out.dims = m.dims;
    out.channels = m.channels;
    out.spacing = m.spacing;
    out.data.resize(m.data.size());

    const Dims d = m.dims;
    const int c = m.channels;
    parallel_for(d.voxel_count(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const int x = int(idx % d.x);
            const int y = int((idx / d.x) % d.y);
            const int z = int(idx / (std::int64_t(d.x) * d.y));
            const Vec3 v = u.at(idx);
            detail::sample_channels(m.data.data(), d, c, x + v.x, y + v.y, z + v.z,
                                    out.data.data() + idx * c);
        }
    });
    return out;
}

inline ScalarVolume warp(const ScalarVolume& m, const DisplacementField& u) {
    return to_scalar(warp(to_feature(m), u));
}

/// 2x trilinear decimation: output voxel j samples input coordinate 2j + 0.5
/// (center aligned), output dims are ceil(dim/2), spacing doubles.
inline FeatureVolume downsample2(const FeatureVolume& f) {
    require(f.dims.min_axis() >= 2, "downsample2: every axis must be >= 2, got " + to_string(f.dims));
    FeatureVolume out;
    out.dims = {(f.dims.x + 1) / 2, (f.dims.y + 1) / 2, (f.dims.z + 1) / 2};
    out.channels = f.channels;
    out.spacing = {2.0 * f.spacing[0], 2.0 * f.spacing[1], 2.0 * f.spacing[2]};
    out.data.resize(std::size_t(out.dims.voxel_count()) * f.channels);

    const Dims od = out.dims;
    const int c = f.channels;
    parallel_for(od.voxel_count(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const int x = int(idx % od.x);
            const int y = int((idx / od.x) % od.y);
            const int z = int(idx / (std::int64_t(od.x) * od.y));
            detail::sample_channels(f.data.data(), f.dims, c, 2.0 * x + 0.5, 2.0 * y + 0.5,
                                    2.0 * z + 0.5, out.data.data() + idx * c);
        }
    });
    return out;
}

inline ScalarVolume downsample2(const ScalarVolume& v) {
    return to_scalar(downsample2(to_feature(v)));
}

/// Upsamples a field onto a grid of roughly doubled dims (each target axis in
/// [2n-2, 2n]) and converts the vectors to fine-grid voxel units (x2). Target
/// voxel i reads coarse coordinate (i - 0.5) / 2, the inverse of the
/// downsample2 center mapping.
inline DisplacementField upsample_field2(const DisplacementField& u, const Dims& target) {
    validate_dims(target);
    for (int a = 0; a < 3; ++a) {
        const int n = a == 0 ? u.dims.x : (a == 1 ? u.dims.y : u.dims.z);
        const int t = a == 0 ? target.x : (a == 1 ? target.y : target.z);
        require(t >= 2 * n - 2 && t <= 2 * n,
                "upsample_field2: target " + to_string(target) + " not within [2n-2, 2n] of " +
                    to_string(u.dims));
    }
    DisplacementField out;
    out.dims = target;
    out.data.resize(std::size_t(target.voxel_count()) * 3);
    parallel_for(target.voxel_count(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const int x = int(idx % target.x);
            const int y = int((idx / target.x) % target.y);
            const int z = int(idx / (std::int64_t(target.x) * target.y));
            const Vec3 v = sample_field(u, {(x - 0.5) / 2.0, (y - 0.5) / 2.0, (z - 0.5) / 2.0});
            out.set(idx, 2.0 * v);
        }
    });
    return out;
}

/// Composition of two fields on the same grid:
/// out(x) = u_res(x) + u_prev(x + u_res(x)), so that warping by `out` equals
/// warping by u_prev then by u_res.
inline DisplacementField compose(const DisplacementField& u_res, const DisplacementField& u_prev) {
    require(u_res.dims == u_prev.dims, "compose: field dims " + to_string(u_res.dims) +
                                           " do not match " + to_string(u_prev.dims));
    DisplacementField out;
    out.dims = u_res.dims;
    out.data.resize(u_res.data.size());
    const Dims d = u_res.dims;
    parallel_for(d.voxel_count(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const int x = int(idx % d.x);
            const int y = int((idx / d.x) % d.y);
            const int z = int(idx / (std::int64_t(d.x) * d.y));
            const Vec3 r = u_res.at(idx);
            const Vec3 p = sample_field(u_prev, {x + r.x, y + r.y, z + r.z});
            out.set(idx, r + p);
        }
    });
    return out;
}

}  // namespace voxelopt
