#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "voxelopt/cost_volume.hpp"
#include "voxelopt/parallel.hpp"
#include "voxelopt/types.hpp"

namespace voxelopt {

/// Softmax-normalized local cost volume: per voxel, (2k+1)^3 probabilities
/// summing to 1.
struct ProbVolume {
    Dims dims;
    int k = 1;
    std::vector<double> probs;

    int offsets_per_voxel() const {
        const int w = 2 * k + 1;
        return w * w * w;
    }
};

/// Per-voxel displacement entropy, in nats. Low entropy marks a confident,
/// strong displacement signal; high entropy a uniform or ambiguous one.
struct EntropyMap {
    Dims dims;
    std::vector<double> values;
};

/// P(x,o) = exp(-C(x,o)/beta) / sum_p exp(-C(x,p)/beta). The per-voxel
/// minimum cost is subtracted before exponentiation so large costs cannot
/// underflow the whole distribution.
inline ProbVolume softmax_prob(const CostVolume& c, double beta) {
    require(std::isfinite(beta) && beta > 0.0, "softmax_prob: beta must be > 0");
    const int n_off = c.offsets_per_voxel();
    ProbVolume out;
    out.dims = c.dims;
    out.k = c.k;
    out.probs.resize(c.costs.size());
    const double inv_beta = 1.0 / beta;
    parallel_for(c.dims.voxel_count(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const double* cv = c.costs.data() + idx * n_off;
            double* pv = out.probs.data() + idx * n_off;
            double mn = cv[0];
            for (int o = 1; o < n_off; ++o)
                if (cv[o] < mn) mn = cv[o];
            double sum = 0.0;
            for (int o = 0; o < n_off; ++o) {
                const double e = std::exp(-(cv[o] - mn) * inv_beta);
                pv[o] = e;
                sum += e;
            }
            const double inv = 1.0 / sum;
            for (int o = 0; o < n_off; ++o) pv[o] *= inv;
        }
    });
    return out;
}

/// E(x) = sum_o -P(x,o) ln P(x,o), with 0 ln 0 = 0.
inline EntropyMap displacement_entropy(const ProbVolume& p) {
    const int n_off = p.offsets_per_voxel();
    EntropyMap out;
    out.dims = p.dims;
    out.values.resize(std::size_t(p.dims.voxel_count()));
    parallel_for(p.dims.voxel_count(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const double* pv = p.probs.data() + idx * n_off;
            double e = 0.0;
            for (int o = 0; o < n_off; ++o)
                if (pv[o] > 0.0) e -= pv[o] * std::log(pv[o]);
            out.values[idx] = e < 0.0 ? 0.0 : e;  // guard fp residue at one-hot
        }
    });
    return out;
}

/// Per-voxel Gaussian blurring scale in voxels, derived from normalized
/// entropy. Bounded by alpha * ln 2.
struct SigmaMap {
    Dims dims;
    std::vector<double> values;
};

/// sigma(x) = alpha * ln(E(x)/max(E) + 1); all zeros when max(E) == 0.
inline SigmaMap sigma_map(const EntropyMap& e, double alpha) {
    require(std::isfinite(alpha) && alpha > 0.0, "sigma_map: alpha must be > 0");
    SigmaMap out;
    out.dims = e.dims;
    out.values.assign(e.values.size(), 0.0);
    double max_e = 0.0;
    for (double v : e.values)
        if (v > max_e) max_e = v;
    if (max_e <= 0.0) return out;
    const double inv_max = 1.0 / max_e;
    parallel_for(std::int64_t(e.values.size()), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i)
            out.values[i] = alpha * std::log1p(e.values[i] * inv_max);
    });
    return out;
}

}  // namespace voxelopt
