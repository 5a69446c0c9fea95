#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "voxelopt/parallel.hpp"
#include "voxelopt/types.hpp"

namespace voxelopt {

/// The (2k+1)^3 integer offsets of the local search lattice, enumerated
/// z-major, then y, then x, each from -k to +k. The zero offset sits at the
/// center index (size()-1)/2.
struct OffsetLattice {
    int k = 1;
    std::vector<std::array<int, 3>> offsets;

    static OffsetLattice make(int k) {
        require(k >= 1, "offset lattice: k must be >= 1");
        OffsetLattice lat;
        lat.k = k;
        const int w = 2 * k + 1;
        lat.offsets.reserve(std::size_t(w) * w * w);
        for (int oz = -k; oz <= k; ++oz)
            for (int oy = -k; oy <= k; ++oy)
                for (int ox = -k; ox <= k; ++ox) lat.offsets.push_back({ox, oy, oz});
        return lat;
    }

    int size() const { return int(offsets.size()); }
    int index_of(int ox, int oy, int oz) const {
        const int w = 2 * k + 1;
        return ((oz + k) * w + (oy + k)) * w + (ox + k);
    }
};

/// Local cost volume: (2k+1)^3 dissimilarity values per voxel, stored in
/// OffsetLattice enumeration order.
struct CostVolume {
    Dims dims;
    int k = 1;
    std::vector<double> costs;

    int offsets_per_voxel() const {
        const int w = 2 * k + 1;
        return w * w * w;
    }
    const double* at(std::int64_t idx) const { return costs.data() + idx * offsets_per_voxel(); }
};

inline void validate(const CostVolume& c) {
    validate_dims(c.dims);
    require(c.k >= 1, "cost volume: k must be >= 1");
    require(std::int64_t(c.costs.size()) == c.dims.voxel_count() * c.offsets_per_voxel(),
            "cost volume: data length does not match dims/k");
    for (double v : c.costs)
        require(std::isfinite(v) && v >= 0.0, "cost volume: costs must be finite and >= 0");
}

/// C(x,o) = mean over channels of |f(x,c) - m(x+o,c)|, with x+o clamped to
/// the volume boundary. Mean (not sum) keeps cost magnitude independent of
/// the feature channel count.
inline CostVolume build_cost(const FeatureVolume& f, const FeatureVolume& m, int k) {
    require(f.dims == m.dims, "build_cost: fixed dims " + to_string(f.dims) +
                                  " do not match moving dims " + to_string(m.dims));
    require(f.channels == m.channels, "build_cost: channel count mismatch");
    const OffsetLattice lat = OffsetLattice::make(k);
    const int n_off = lat.size();
    const int c = f.channels;
    const Dims d = f.dims;

    CostVolume out;
    out.dims = d;
    out.k = k;
    out.costs.resize(std::size_t(d.voxel_count()) * n_off);

    const double inv_c = 1.0 / c;
    parallel_for(d.voxel_count(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const int x = int(idx % d.x);
            const int y = int((idx / d.x) % d.y);
            const int z = int(idx / (std::int64_t(d.x) * d.y));
            const double* fv = f.data.data() + idx * c;
            double* cv = out.costs.data() + idx * n_off;
            for (int o = 0; o < n_off; ++o) {
                const auto& off = lat.offsets[std::size_t(o)];
                int mx = x + off[0], my = y + off[1], mz = z + off[2];
                if (mx < 0) mx = 0;
                if (mx >= d.x) mx = d.x - 1;
                if (my < 0) my = 0;
                if (my >= d.y) my = d.y - 1;
                if (mz < 0) mz = 0;
                if (mz >= d.z) mz = d.z - 1;
                const double* mv = m.data.data() + voxel_index(d, mx, my, mz) * c;
                double acc = 0.0;
                for (int ch = 0; ch < c; ++ch) acc += std::abs(fv[ch] - mv[ch]);
                cv[o] = acc * inv_c;
            }
        }
    });
    return out;
}

/// Central 27-offset sub-volume of a larger cost volume; identity copy for
/// k == 1. The entropy path always works on this k=1 restriction.
inline CostVolume restrict_to_k1(const CostVolume& c) {
    if (c.k == 1) return c;
    const int w = 2 * c.k + 1;
    const int n_off = c.offsets_per_voxel();
    CostVolume out;
    out.dims = c.dims;
    out.k = 1;
    out.costs.resize(std::size_t(c.dims.voxel_count()) * 27);
    parallel_for(c.dims.voxel_count(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const double* src = c.costs.data() + idx * n_off;
            double* dst = out.costs.data() + idx * 27;
            int o = 0;
            for (int oz = -1; oz <= 1; ++oz)
                for (int oy = -1; oy <= 1; ++oy)
                    for (int ox = -1; ox <= 1; ++ox)
                        dst[o++] = src[((oz + c.k) * w + (oy + c.k)) * w + (ox + c.k)];
        }
    });
    return out;
}

}  // namespace voxelopt
