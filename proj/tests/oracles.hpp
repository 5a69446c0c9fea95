#pragma once

// Independent brute-force reference implementations used only by tests.
// These deliberately avoid the library's separable/incremental tricks: plain
// nested loops, explicit weight tables, straightforward normalization.

#include <cmath>
#include <cstdint>
#include <vector>

#include "voxelopt/types.hpp"

namespace voxelopt::oracles {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

/// Dense 3D Gaussian convolution with replicate-clamped taps: product kernel
/// truncated at ceil(3 sigma) per axis, normalized to sum 1.
inline std::vector<double> gauss3d_dense(const std::vector<double>& in, const Dims& d,
                                         int channels, double sigma) {
    if (sigma < 1e-3) return in;
    const int r = int(std::ceil(3.0 * sigma));
    std::vector<double> k1(std::size_t(2 * r + 1));
    double s1 = 0.0;
    for (int t = -r; t <= r; ++t) {
        k1[std::size_t(t + r)] = std::exp(-double(t) * t / (2.0 * sigma * sigma));
        s1 += k1[std::size_t(t + r)];
    }
    for (double& w : k1) w /= s1;

    std::vector<double> out(in.size(), 0.0);
    for (int z = 0; z < d.z; ++z)
        for (int y = 0; y < d.y; ++y)
            for (int x = 0; x < d.x; ++x)
                for (int c = 0; c < channels; ++c) {
                    double acc = 0.0;
                    for (int tz = -r; tz <= r; ++tz)
                        for (int ty = -r; ty <= r; ++ty)
                            for (int tx = -r; tx <= r; ++tx) {
                                const int xx = clampi(x + tx, 0, d.x - 1);
                                const int yy = clampi(y + ty, 0, d.y - 1);
                                const int zz = clampi(z + tz, 0, d.z - 1);
                                const double w = k1[std::size_t(tx + r)] * k1[std::size_t(ty + r)] *
                                                 k1[std::size_t(tz + r)];
                                acc += w * in[std::size_t(voxel_index(d, xx, yy, zz) * channels + c)];
                            }
                    out[std::size_t(voxel_index(d, x, y, z) * channels + c)] = acc;
                }
    return out;
}

/// Direct 1D convolution along x with a clamped, renormalized Gaussian.
inline std::vector<double> gauss1d_dense_x(const std::vector<double>& in, int n, double sigma) {
    if (sigma < 1e-3) return in;
    const int r = int(std::ceil(3.0 * sigma));
    std::vector<double> out(in.size());
    for (int i = 0; i < n; ++i) {
        double acc = 0.0, wsum = 0.0;
        for (int t = -r; t <= r; ++t) {
            const double w = std::exp(-double(t) * t / (2.0 * sigma * sigma));
            acc += w * in[std::size_t(clampi(i + t, 0, n - 1))];
            wsum += w;
        }
        out[std::size_t(i)] = acc / wsum;
    }
    return out;
}

}  // namespace voxelopt::oracles
