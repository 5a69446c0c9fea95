#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "voxelopt/cost_volume.hpp"
#include "voxelopt/entropy.hpp"
#include "voxelopt/gaussian_filter.hpp"
#include "voxelopt/parallel.hpp"
#include "voxelopt/types.hpp"

namespace voxelopt {

/// Strictly decreasing interaction coefficients, one per coordinate-descent
/// iteration.
struct ThetaSchedule {
    std::vector<double> values;
};

inline void validate(const ThetaSchedule& s) {
    require(!s.values.empty(), "theta schedule: must have at least one value");
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        require(std::isfinite(s.values[i]) && s.values[i] > 0.0,
                "theta schedule: values must be finite and > 0");
        if (i > 0)
            require(s.values[i] < s.values[i - 1], "theta schedule: values must be strictly decreasing");
    }
}

/// Default schedule for n iterations: starts at 150 and alternately divides
/// by 3 and 10/3, which reproduces {150, 50, 15, 5, 1.5, 0.5} at n = 6 and
/// extends the same decay pattern beyond.
inline ThetaSchedule theta_schedule(int iterations = 6) {
    require(iterations >= 1, "theta schedule: iterations must be >= 1");
    ThetaSchedule s;
    s.values.reserve(std::size_t(iterations));
    double v = 150.0;
    for (int i = 0; i < iterations; ++i) {
        s.values.push_back(v);
        v = (i % 2 == 0) ? v / 3.0 : v * 3.0 / 10.0;
    }
    return s;
}

struct LevelSolverConfig {
    ThetaSchedule thetas = theta_schedule();
    bool adaptive = true;   // voxel-adaptive message passing
    bool prefilter = true;  // spatial smoothing of the cost volume before optimization
    double alpha = 1.5;     // blurring strength cap
    double beta = 0.1;      // softmax temperature
    int k = 1;              // search lattice kernel size

    /// Isotropic smoother strength used when adaptivity is disabled: the cap
    /// of the adaptive sigma range.
    double iso_sigma() const { return alpha * std::numbers::ln2; }
};

inline void validate(const LevelSolverConfig& cfg) {
    validate(cfg.thetas);
    require(std::isfinite(cfg.alpha) && cfg.alpha > 0.0, "level config: alpha must be > 0");
    require(std::isfinite(cfg.beta) && cfg.beta > 0.0, "level config: beta must be > 0");
    require(cfg.k >= 1, "level config: k must be >= 1");
}

/// Penalized discrete argmin: v(x) = argmin_o C(x,o) + ||o - u(x)||^2 / (2 theta).
/// Ties resolve to the smallest ||o||^2, then to enumeration order, biasing
/// ambiguous voxels toward the identity. Output components are integers in
/// [-k, k] stored as reals.
inline DisplacementField v_step(const CostVolume& c_tilde, const DisplacementField& u,
                                double theta) {
    require(c_tilde.dims == u.dims, "v_step: cost dims " + to_string(c_tilde.dims) +
                                        " do not match field dims " + to_string(u.dims));
    require(std::isfinite(theta) && theta > 0.0, "v_step: theta must be > 0");
    const OffsetLattice lat = OffsetLattice::make(c_tilde.k);
    const int n_off = lat.size();
    std::vector<double> offset_norm_sq(static_cast<std::size_t>(n_off));
    for (int o = 0; o < n_off; ++o) {
        const auto& off = lat.offsets[std::size_t(o)];
        offset_norm_sq[std::size_t(o)] =
            double(off[0] * off[0] + off[1] * off[1] + off[2] * off[2]);
    }

    DisplacementField out;
    out.dims = u.dims;
    out.data.resize(u.data.size());
    const double half_inv_theta = 0.5 / theta;
    parallel_for(u.dims.voxel_count(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const Vec3 ux = u.at(idx);
            const double* cv = c_tilde.costs.data() + idx * n_off;
            double best_score = 0.0, best_norm = 0.0;
            int best = -1;
            for (int o = 0; o < n_off; ++o) {
                const auto& off = lat.offsets[std::size_t(o)];
                const double dx = off[0] - ux.x;
                const double dy = off[1] - ux.y;
                const double dz = off[2] - ux.z;
                const double score = cv[o] + half_inv_theta * (dx * dx + dy * dy + dz * dz);
                if (best < 0 || score < best_score ||
                    (score == best_score && offset_norm_sq[std::size_t(o)] < best_norm)) {
                    best = o;
                    best_score = score;
                    best_norm = offset_norm_sq[std::size_t(o)];
                }
            }
            const auto& off = lat.offsets[std::size_t(best)];
            out.set(idx, {double(off[0]), double(off[1]), double(off[2])});
        }
    });
    return out;
}

/// Smoothing half of the coordinate descent: Gaussian filtering of v, with
/// the receiving voxel's sigma in adaptive mode, or the isotropic cap
/// otherwise.
inline DisplacementField u_step(const DisplacementField& v, const SigmaMap& sigma,
                                const LevelSolverConfig& cfg) {
    if (cfg.adaptive) {
        require(sigma.dims == v.dims, "u_step: sigma map dims mismatch");
        return filter_field(v, GaussianSpec::adaptive(sigma));
    }
    return filter_field(v, GaussianSpec::isotropic(cfg.iso_sigma()));
}

/// Per-level byproducts kept for inspection (entropy / sigma map dumps).
struct LevelDiagnostics {
    EntropyMap entropy;
    SigmaMap sigma;
};

/// Single-level discrete optimization: builds the cost volume, derives the
/// entropy-guided sigma map, optionally pre-filters the cost volume, then
/// alternates v_step / u_step under the decaying theta schedule starting
/// from u = 0. The returned field is real-valued through smoothing.
inline DisplacementField solve_level(const FeatureVolume& f, const FeatureVolume& m_warped,
                                     const LevelSolverConfig& cfg,
                                     LevelDiagnostics* diag = nullptr) {
    validate(cfg);
    const CostVolume cost = build_cost(f, m_warped, cfg.k);
    const ProbVolume prob = softmax_prob(cfg.k == 1 ? cost : restrict_to_k1(cost), cfg.beta);
    const EntropyMap entropy = displacement_entropy(prob);
    const SigmaMap sigma = sigma_map(entropy, cfg.alpha);
    if (diag) {
        diag->entropy = entropy;
        diag->sigma = sigma;
    }

    CostVolume c_tilde;
    if (cfg.prefilter) {
        c_tilde = filter_cost(cost, cfg.adaptive ? GaussianSpec::adaptive(sigma)
                                                 : GaussianSpec::isotropic(cfg.iso_sigma()));
    } else {
        c_tilde = cost;
    }

    DisplacementField u = make_zero_field(f.dims);
    for (double theta : cfg.thetas.values) {
        const DisplacementField v = v_step(c_tilde, u, theta);
        u = u_step(v, sigma, cfg);
    }
    return u;
}

}  // namespace voxelopt
