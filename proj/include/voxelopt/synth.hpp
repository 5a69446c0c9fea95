#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "voxelopt/diffeo.hpp"
#include "voxelopt/gaussian_filter.hpp"
#include "voxelopt/types.hpp"
#include "voxelopt/volume_ops.hpp"

namespace voxelopt {

/// Fixed image, deformed moving image, and the ground-truth field the
/// registration should recover: warp(moving, truth) ~= fixed.
struct SynthPair {
    ScalarVolume fixed;
    ScalarVolume moving;
    DisplacementField truth;
};

namespace detail {

inline ScalarVolume smooth_noise(const Dims& dims, double sigma, std::mt19937& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    FeatureVolume f;
    f.dims = dims;
    f.channels = 1;
    f.data.resize(std::size_t(dims.voxel_count()));
    for (double& v : f.data) v = uni(rng);
    f.data = gaussian_1d_pass(f.data, dims, 1, 0, GaussianSpec::isotropic(sigma));
    f.data = gaussian_1d_pass(f.data, dims, 1, 1, GaussianSpec::isotropic(sigma));
    f.data = gaussian_1d_pass(f.data, dims, 1, 2, GaussianSpec::isotropic(sigma));
    double mn = f.data[0], mx = f.data[0];
    for (double v : f.data) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    const double scale = mx > mn ? 1.0 / (mx - mn) : 0.0;
    for (double& v : f.data) v = (v - mn) * scale;
    return to_scalar(f);
}

}  // namespace detail

/// Piecewise-smooth test volume in [0,1]: bright constant-intensity blobs
/// with ~3-voxel soft edges over a faint smooth background. Uniform blob
/// interiors carry weak displacement signal, boundaries carry strong signal,
/// mimicking organ-like content.
inline ScalarVolume make_textured_volume(const Dims& dims, std::uint64_t seed) {
    validate_dims(dims);
    std::mt19937 rng(std::uint32_t(seed * 2654435761u + 1));
    ScalarVolume vol = detail::smooth_noise(dims, std::max(2.0, dims.min_axis() / 12.0), rng);
    for (double& v : vol.data) v = 0.05 + 0.15 * v;  // faint background

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n_blobs = 8;
    for (int b = 0; b < n_blobs; ++b) {
        const double cx = (0.15 + 0.7 * uni(rng)) * (dims.x - 1);
        const double cy = (0.15 + 0.7 * uni(rng)) * (dims.y - 1);
        const double cz = (0.15 + 0.7 * uni(rng)) * (dims.z - 1);
        const double rx = (0.10 + 0.14 * uni(rng)) * dims.min_axis();
        const double ry = (0.10 + 0.14 * uni(rng)) * dims.min_axis();
        const double rz = (0.10 + 0.14 * uni(rng)) * dims.min_axis();
        const double intensity = 0.35 + 0.65 * uni(rng);
        const double r_eff = std::cbrt(rx * ry * rz);

        for (std::int64_t idx = 0; idx < dims.voxel_count(); ++idx) {
            const int x = int(idx % dims.x);
            const int y = int((idx / dims.x) % dims.y);
            const int z = int(idx / (std::int64_t(dims.x) * dims.y));
            const double dx = (x - cx) / rx, dy = (y - cy) / ry, dz = (z - cz) / rz;
            const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
            // signed distance from the blob surface, roughly in voxels
            const double d = (r - 1.0) * r_eff;
            if (d > 6.0) continue;
            const double w = 0.5 * (1.0 - std::tanh(d / 1.5));
            const double v = intensity * w;
            if (v > vol.data[std::size_t(idx)]) vol.data[std::size_t(idx)] = v;
        }
    }
    return vol;
}

/// Smooth random stationary velocity with the requested max-norm.
inline DisplacementField make_smooth_velocity(const Dims& dims, double max_norm,
                                              std::uint64_t seed) {
    std::mt19937 rng(std::uint32_t(seed * 40503u + 7));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    DisplacementField v = make_zero_field(dims);
    for (double& d : v.data) d = uni(rng);
    const double sigma = std::max(3.0, dims.min_axis() / 8.0);
    v.data = gaussian_1d_pass(v.data, dims, 3, 0, GaussianSpec::isotropic(sigma));
    v.data = gaussian_1d_pass(v.data, dims, 3, 1, GaussianSpec::isotropic(sigma));
    v.data = gaussian_1d_pass(v.data, dims, 3, 2, GaussianSpec::isotropic(sigma));
    double mx = 0.0;
    for (std::int64_t i = 0; i < dims.voxel_count(); ++i) mx = std::max(mx, norm_inf(v.at(i)));
    const double scale = mx > 0.0 ? max_norm / mx : 0.0;
    for (double& d : v.data) d *= scale;
    return v;
}

/// Pure translation of `magnitude` voxels along x; the moving image is the
/// fixed image resampled through the exact inverse translation.
inline SynthPair make_translation_pair(const Dims& dims, double magnitude, std::uint64_t seed) {
    SynthPair p;
    p.fixed = make_textured_volume(dims, seed);
    p.truth = make_zero_field(dims);
    for (std::int64_t i = 0; i < dims.voxel_count(); ++i) p.truth.set(i, {magnitude, 0.0, 0.0});
    DisplacementField inverse = make_zero_field(dims);
    for (std::int64_t i = 0; i < dims.voxel_count(); ++i) inverse.set(i, {-magnitude, 0.0, 0.0});
    p.moving = warp(p.fixed, inverse);
    return p;
}

/// Diffeomorphic ground truth: truth = exp(v) for a smooth random velocity,
/// moving = fixed resampled through exp(-v) (the exact group inverse), with
/// the velocity rescaled so the truth field's max norm hits `max_disp`.
inline SynthPair make_smooth_pair(const Dims& dims, double max_disp, std::uint64_t seed,
                                  int integration_steps = 7) {
    SynthPair p;
    p.fixed = make_textured_volume(dims, seed);
    DisplacementField v = make_smooth_velocity(dims, max_disp, seed + 1);
    // the exponential's max norm tracks the velocity's; two rescale rounds
    // land it on max_disp to ~1e-4 relative
    for (int pass = 0; pass < 2; ++pass) {
        const DisplacementField truth = scaling_squaring(v, integration_steps);
        double mx = 0.0;
        for (std::int64_t i = 0; i < dims.voxel_count(); ++i) mx = std::max(mx, norm_inf(truth.at(i)));
        if (mx <= 0.0) break;
        for (double& d : v.data) d *= max_disp / mx;
    }
    p.truth = scaling_squaring(v, integration_steps);
    DisplacementField neg_v = v;
    for (double& d : neg_v.data) d = -d;
    const DisplacementField inverse = scaling_squaring(neg_v, integration_steps);
    p.moving = warp(p.fixed, inverse);
    return p;
}

}  // namespace voxelopt
