#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "voxelopt/diffeo.hpp"
#include "voxelopt/features.hpp"
#include "voxelopt/level_solver.hpp"
#include "voxelopt/types.hpp"
#include "voxelopt/volume_ops.hpp"

namespace voxelopt {

struct RegistrationConfig {
    int levels = 5;
    LevelSolverConfig level;
    int integration_steps = 7;
    FeatureMode feature_mode = FeatureMode::raw;
};

/// Dims of every pyramid level, element 0 = input resolution. Throws when
/// the coarsest level would fall below 3 voxels on any axis.
inline std::vector<Dims> pyramid_dims(const Dims& input, int levels) {
    require(levels >= 1, "pyramid: levels must be >= 1");
    validate_dims(input);
    std::vector<Dims> out{input};
    for (int l = 1; l < levels; ++l) {
        const Dims& p = out.back();
        out.push_back({(p.x + 1) / 2, (p.y + 1) / 2, (p.z + 1) / 2});
    }
    require(out.back().min_axis() >= 3, "pyramid: " + std::to_string(levels) +
                                            " levels leave the coarsest grid at " + to_string(out.back()) +
                                            ", below 3 voxels per axis, for input " + to_string(input));
    return out;
}

inline void validate(const RegistrationConfig& cfg, const Dims& input) {
    validate(cfg.level);
    require(cfg.integration_steps >= 1, "config: integration_steps must be >= 1");
    pyramid_dims(input, cfg.levels);  // throws if the coarsest level degenerates
}

/// Feature pyramid, fine to coarse: element 0 is the input, element i+1 is
/// downsample2(element i). Features are extracted once at full resolution
/// and only resampled here.
inline std::vector<FeatureVolume> build_pyramid(const FeatureVolume& feat, int levels) {
    pyramid_dims(feat.dims, levels);
    std::vector<FeatureVolume> out;
    out.reserve(std::size_t(levels));
    out.push_back(feat);
    for (int l = 1; l < levels; ++l) out.push_back(downsample2(out.back()));
    return out;
}

struct LevelReport {
    int level = 0;  // pyramid index, 0 = finest
    Dims dims;
    double solve_ms = 0.0;
    double exp_ms = 0.0;
    double compose_ms = 0.0;
};

struct RegistrationResult {
    DisplacementField field;  // full resolution, voxel units
    std::vector<LevelReport> level_reports;        // in processing order, coarsest first
    std::vector<LevelDiagnostics> level_diagnostics;  // filled only when requested
    double total_ms = 0.0;
};

namespace detail {
inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace detail

/// Full coarse-to-fine registration. Per level, coarsest first: the
/// accumulated field is upsampled, the moving features are warped by it, the
/// level residual is solved discretely, exponentiated by scaling and
/// squaring, and composed onto the accumulated field. Deterministic for
/// fixed inputs and config.
inline RegistrationResult register_pair(const FeatureVolume& f, const FeatureVolume& m,
                                        const RegistrationConfig& cfg,
                                        bool collect_diagnostics = false) {
    require(f.dims == m.dims, "register: fixed dims " + to_string(f.dims) +
                                  " do not match moving dims " + to_string(m.dims));
    require(f.channels == m.channels, "register: channel count mismatch");
    validate(cfg, f.dims);
    const auto t_start = std::chrono::steady_clock::now();

    const std::vector<FeatureVolume> f_pyr = build_pyramid(f, cfg.levels);
    const std::vector<FeatureVolume> m_pyr = build_pyramid(m, cfg.levels);

    RegistrationResult result;
    DisplacementField u_acc;
    for (int l = cfg.levels - 1; l >= 0; --l) {
        const Dims level_dims = f_pyr[std::size_t(l)].dims;
        LevelReport report;
        report.level = l;
        report.dims = level_dims;

        u_acc = (l == cfg.levels - 1) ? make_zero_field(level_dims)
                                      : upsample_field2(u_acc, level_dims);
        const FeatureVolume m_w = warp(m_pyr[std::size_t(l)], u_acc);

        auto t0 = std::chrono::steady_clock::now();
        LevelDiagnostics diag;
        const DisplacementField v_res =
            solve_level(f_pyr[std::size_t(l)], m_w, cfg.level, collect_diagnostics ? &diag : nullptr);
        report.solve_ms = detail::ms_since(t0);
        if (collect_diagnostics) result.level_diagnostics.push_back(std::move(diag));

        t0 = std::chrono::steady_clock::now();
        const DisplacementField phi_res = scaling_squaring(v_res, cfg.integration_steps);
        report.exp_ms = detail::ms_since(t0);

        t0 = std::chrono::steady_clock::now();
        u_acc = compose(phi_res, u_acc);
        report.compose_ms = detail::ms_since(t0);

        result.level_reports.push_back(report);
    }
    result.field = std::move(u_acc);
    result.total_ms = detail::ms_since(t_start);
    return result;
}

}  // namespace voxelopt
