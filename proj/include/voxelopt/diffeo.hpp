#pragma once

#include <cmath>
#include <cstdint>

#include "voxelopt/types.hpp"
#include "voxelopt/volume_ops.hpp"

namespace voxelopt {

/// Exponentiates a stationary velocity field by scaling and squaring:
/// phi = v / 2^steps, then `steps` self-compositions. For small per-step
/// displacements the result is a diffeomorphism.
inline DisplacementField scaling_squaring(const DisplacementField& v, int steps) {
    require(steps >= 1, "scaling_squaring: steps must be >= 1");
    DisplacementField phi = v;
    const double scale = std::ldexp(1.0, -steps);  // 1 / 2^steps
    for (double& d : phi.data) d *= scale;
    for (int s = 0; s < steps; ++s) phi = compose(phi, phi);
    return phi;
}

struct JacobianStats {
    double sdlogj = 0.0;        // std dev of ln det J over interior voxels
    double fold_fraction = 0.0; // fraction of interior voxels with det <= 0
};

/// Central-difference Jacobian of the transform x + u(x) on interior voxels.
/// The log-determinant is clamped at 1e-6 so folded voxels cannot blow up the
/// standard deviation; folds are reported separately. Population std dev.
inline JacobianStats jacobian_stats(const DisplacementField& u) {
    require(u.dims.min_axis() >= 3, "jacobian_stats: every axis must be >= 3, got " + to_string(u.dims));
    const Dims d = u.dims;
    const std::int64_t nx = std::int64_t(d.x) - 2;
    const std::int64_t ny = std::int64_t(d.y) - 2;
    const std::int64_t nz = std::int64_t(d.z) - 2;
    const std::int64_t n_interior = nx * ny * nz;

    double sum = 0.0, sum_sq = 0.0;
    std::int64_t folds = 0;
    for (int z = 1; z < d.z - 1; ++z)
        for (int y = 1; y < d.y - 1; ++y)
            for (int x = 1; x < d.x - 1; ++x) {
                const Vec3 dux = 0.5 * (u.at(x + 1, y, z) - u.at(x - 1, y, z));
                const Vec3 duy = 0.5 * (u.at(x, y + 1, z) - u.at(x, y - 1, z));
                const Vec3 duz = 0.5 * (u.at(x, y, z + 1) - u.at(x, y, z - 1));
                const double j[3][3] = {{1.0 + dux.x, duy.x, duz.x},
                                        {dux.y, 1.0 + duy.y, duz.y},
                                        {dux.z, duy.z, 1.0 + duz.z}};
                const double det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) -
                                   j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
                                   j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
                if (det <= 0.0) ++folds;
                const double logdet = std::log(det < 1e-6 ? 1e-6 : det);
                sum += logdet;
                sum_sq += logdet * logdet;
            }

    JacobianStats stats;
    const double mean = sum / double(n_interior);
    const double var = sum_sq / double(n_interior) - mean * mean;
    stats.sdlogj = std::sqrt(var < 0.0 ? 0.0 : var);
    stats.fold_fraction = double(folds) / double(n_interior);
    return stats;
}

}  // namespace voxelopt
