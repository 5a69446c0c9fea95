#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "voxelopt/parallel.hpp"
#include "voxelopt/types.hpp"

namespace voxelopt {

enum class FeatureMode { raw, mind, external };

/// Min-max normalization to [0,1] after clipping to an intensity window.
/// Normalization uses the post-clip data min/max, so values already inside
/// the window keep their relative contrast. A constant volume maps to zeros.
inline FeatureVolume raw_feature(const ScalarVolume& vol, double window_lo = -800.0,
                                 double window_hi = 500.0) {
    require(window_lo < window_hi, "raw_feature: intensity window must satisfy lo < hi");
    FeatureVolume out;
    out.dims = vol.dims;
    out.channels = 1;
    out.spacing = vol.spacing;
    out.data.resize(vol.data.size());

    double mn = window_hi, mx = window_lo;
    for (std::size_t i = 0; i < vol.data.size(); ++i) {
        const double v = std::clamp(vol.data[i], window_lo, window_hi);
        out.data[i] = v;
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    if (mx <= mn) {
        std::fill(out.data.begin(), out.data.end(), 0.0);
        return out;
    }
    const double scale = 1.0 / (mx - mn);
    for (double& v : out.data) v = (v - mn) * scale;
    return out;
}

namespace detail {

/// Fixed 3^3 Gaussian patch weights, normalized to sum 1.
inline std::array<double, 27> patch_weights(double sigma_patch) {
    std::array<double, 27> w{};
    double sum = 0.0;
    int i = 0;
    for (int tz = -1; tz <= 1; ++tz)
        for (int ty = -1; ty <= 1; ++ty)
            for (int tx = -1; tx <= 1; ++tx) {
                const double d2 = tx * tx + ty * ty + tz * tz;
                w[i] = std::exp(-d2 / (2.0 * sigma_patch * sigma_patch));
                sum += w[i];
                ++i;
            }
    for (double& v : w) v /= sum;
    return w;
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace detail

/// Six-channel self-similarity descriptor. For each face-neighbor offset r
/// (channel order -x,+x,-y,+y,-z,+z):
///   D(x,r) = sum_t w_t (vol(x+t) - vol(x+r+t))^2   over the 3^3 patch,
///   V(x)   = max(mean_r D(x,r), 1e-6),
///   channel = exp(-D(x,r) / V(x)),
/// then each voxel's channels are divided by their maximum so the strongest
/// response is exactly 1. Reads clamp to the volume boundary. The D/V ratio
/// makes the descriptor invariant to affine intensity rescaling.
inline FeatureVolume mind_extract(const ScalarVolume& vol, double sigma_patch = 0.5) {
    require(vol.dims.min_axis() >= 3, "mind_extract: every axis must be >= 3, got " + to_string(vol.dims));
    require(sigma_patch > 0.0, "mind_extract: sigma_patch must be > 0");
    constexpr double kVarianceFloor = 1e-6;
    static constexpr int kNeighbors[6][3] = {{-1, 0, 0}, {1, 0, 0},  {0, -1, 0},
                                             {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
    const std::array<double, 27> w = detail::patch_weights(sigma_patch);
    const Dims d = vol.dims;

    FeatureVolume out;
    out.dims = d;
    out.channels = 6;
    out.spacing = vol.spacing;
    out.data.resize(std::size_t(d.voxel_count()) * 6);

    parallel_for(d.voxel_count(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const int x = int(idx % d.x);
            const int y = int((idx / d.x) % d.y);
            const int z = int(idx / (std::int64_t(d.x) * d.y));
            double dist[6];
            double mean = 0.0;
            for (int r = 0; r < 6; ++r) {
                const int rx = kNeighbors[r][0], ry = kNeighbors[r][1], rz = kNeighbors[r][2];
                double acc = 0.0;
                int wi = 0;
                for (int tz = -1; tz <= 1; ++tz)
                    for (int ty = -1; ty <= 1; ++ty)
                        for (int tx = -1; tx <= 1; ++tx) {
                            const double a =
                                vol.data[voxel_index(d, detail::clampi(x + tx, 0, d.x - 1),
                                                     detail::clampi(y + ty, 0, d.y - 1),
                                                     detail::clampi(z + tz, 0, d.z - 1))];
                            const double b =
                                vol.data[voxel_index(d, detail::clampi(x + rx + tx, 0, d.x - 1),
                                                     detail::clampi(y + ry + ty, 0, d.y - 1),
                                                     detail::clampi(z + rz + tz, 0, d.z - 1))];
                            acc += w[wi++] * (a - b) * (a - b);
                        }
                dist[r] = acc;
                mean += acc;
            }
            mean /= 6.0;
            const double variance = mean < kVarianceFloor ? kVarianceFloor : mean;
            double* ch = out.data.data() + idx * 6;
            double mx = 0.0;
            for (int r = 0; r < 6; ++r) {
                ch[r] = std::exp(-dist[r] / variance);
                mx = std::max(mx, ch[r]);
            }
            for (int r = 0; r < 6; ++r) ch[r] /= mx;
        }
    });
    return out;
}

/// Optional per-channel z-score for externally supplied features; channels
/// with near-zero spread become zero.
inline void zscore_channels(FeatureVolume& f) {
    const std::int64_t n = f.dims.voxel_count();
    for (int c = 0; c < f.channels; ++c) {
        double mean = 0.0;
        for (std::int64_t i = 0; i < n; ++i) mean += f.data[i * f.channels + c];
        mean /= double(n);
        double var = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            const double v = f.data[i * f.channels + c] - mean;
            var += v * v;
        }
        const double sd = std::sqrt(var / double(n));
        if (sd < 1e-12) {
            for (std::int64_t i = 0; i < n; ++i) f.data[i * f.channels + c] = 0.0;
        } else {
            const double inv = 1.0 / sd;
            for (std::int64_t i = 0; i < n; ++i)
                f.data[i * f.channels + c] = (f.data[i * f.channels + c] - mean) * inv;
        }
    }
}

}  // namespace voxelopt
