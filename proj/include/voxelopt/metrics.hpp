#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "voxelopt/diffeo.hpp"
#include "voxelopt/types.hpp"

namespace voxelopt {

/// Nearest-neighbor resampling of categorical labels at x + u(x); half-voxel
/// ties round away from zero, samples clamp to the boundary.
inline LabelVolume warp_labels(const LabelVolume& l, const DisplacementField& u) {
    require(l.dims == u.dims, "warp_labels: label dims " + to_string(l.dims) +
                                  " do not match field dims " + to_string(u.dims));
    LabelVolume out;
    out.dims = l.dims;
    out.spacing = l.spacing;
    out.labels.resize(l.labels.size());
    const Dims d = l.dims;
    for (std::int64_t idx = 0; idx < d.voxel_count(); ++idx) {
        const int x = int(idx % d.x);
        const int y = int((idx / d.x) % d.y);
        const int z = int(idx / (std::int64_t(d.x) * d.y));
        const Vec3 v = u.at(idx);
        const int sx = std::clamp(int(std::llround(x + v.x)), 0, d.x - 1);
        const int sy = std::clamp(int(std::llround(y + v.y)), 0, d.y - 1);
        const int sz = std::clamp(int(std::llround(z + v.z)), 0, d.z - 1);
        out.labels[std::size_t(idx)] = l.labels[std::size_t(voxel_index(d, sx, sy, sz))];
    }
    return out;
}

struct DiceResult {
    std::vector<std::pair<std::int32_t, double>> per_label;
    double mean = 0.0;
};

/// Per-label Dice 2|A∩B| / (|A|+|B|). Labels absent from both volumes are
/// excluded from the mean; absent from exactly one scores 0. An empty
/// label_set means all foreground labels present in either volume.
inline DiceResult dice(const LabelVolume& a, const LabelVolume& b,
                       const std::vector<std::int32_t>& label_set = {}) {
    require(a.dims == b.dims, "dice: dims mismatch");
    std::set<std::int32_t> labels(label_set.begin(), label_set.end());
    if (labels.empty()) {
        for (std::int32_t v : a.labels)
            if (v != 0) labels.insert(v);
        for (std::int32_t v : b.labels)
            if (v != 0) labels.insert(v);
    }
    std::map<std::int32_t, std::int64_t> size_a, size_b, overlap;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        const std::int32_t la = a.labels[i], lb = b.labels[i];
        if (la != 0) ++size_a[la];
        if (lb != 0) ++size_b[lb];
        if (la != 0 && la == lb) ++overlap[la];
    }
    DiceResult r;
    double sum = 0.0;
    int counted = 0;
    for (std::int32_t lab : labels) {
        const std::int64_t na = size_a.count(lab) ? size_a[lab] : 0;
        const std::int64_t nb = size_b.count(lab) ? size_b[lab] : 0;
        if (na == 0 && nb == 0) continue;  // absent from both
        const std::int64_t ov = overlap.count(lab) ? overlap[lab] : 0;
        const double d = 2.0 * double(ov) / double(na + nb);
        r.per_label.emplace_back(lab, d);
        sum += d;
        ++counted;
    }
    r.mean = counted > 0 ? sum / counted : 0.0;
    return r;
}

namespace detail {

/// Surface voxels: foreground with at least one background face-neighbor;
/// neighbors outside the grid count as background.
inline std::vector<std::int64_t> surface_voxels(const std::vector<std::uint8_t>& mask,
                                                const Dims& d) {
    std::vector<std::int64_t> out;
    for (std::int64_t idx = 0; idx < d.voxel_count(); ++idx) {
        if (!mask[std::size_t(idx)]) continue;
        const int x = int(idx % d.x);
        const int y = int((idx / d.x) % d.y);
        const int z = int(idx / (std::int64_t(d.x) * d.y));
        const bool surface =
            x == 0 || !mask[std::size_t(idx - 1)] || x == d.x - 1 || !mask[std::size_t(idx + 1)] ||
            y == 0 || !mask[std::size_t(idx - d.x)] || y == d.y - 1 || !mask[std::size_t(idx + d.x)] ||
            z == 0 || !mask[std::size_t(idx - std::int64_t(d.x) * d.y)] || z == d.z - 1 ||
            !mask[std::size_t(idx + std::int64_t(d.x) * d.y)];
        if (surface) out.push_back(idx);
    }
    return out;
}

/// 1D lower envelope of parabolas (Felzenszwalb-Huttenlocher), sample
/// positions spaced `step` apart in mm. f holds squared distances on entry
/// and exit; positions with no reachable site stay infinite.
inline void edt_1d(std::vector<double>& f, std::vector<double>& scratch, std::vector<int>& v,
                   std::vector<double>& z, int n, double step) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    int first = -1;
    for (int q = 0; q < n; ++q)
        if (f[std::size_t(q)] < kInf) {
            first = q;
            break;
        }
    if (first < 0) return;  // no sites on this line

    int k = 0;
    v[0] = first;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = first + 1; q < n; ++q) {
        if (f[std::size_t(q)] == kInf) continue;
        const double xq = q * step;
        while (true) {
            const int p = v[std::size_t(k)];
            const double xp = p * step;
            const double s =
                ((f[std::size_t(q)] + xq * xq) - (f[std::size_t(p)] + xp * xp)) / (2.0 * (xq - xp));
            if (k > 0 && s <= z[std::size_t(k)]) {
                --k;
                continue;
            }
            ++k;
            v[std::size_t(k)] = q;
            z[std::size_t(k)] = s;
            z[std::size_t(k) + 1] = kInf;
            break;
        }
    }
    int kk = 0;
    for (int i = 0; i < n; ++i) {
        const double xi = i * step;
        while (z[std::size_t(kk) + 1] < xi) ++kk;
        const double dx = xi - v[std::size_t(kk)] * step;
        scratch[std::size_t(i)] = dx * dx + f[std::size_t(v[std::size_t(kk)])];
    }
    for (int i = 0; i < n; ++i) f[std::size_t(i)] = scratch[std::size_t(i)];
}

/// Exact squared Euclidean distance transform in mm^2 to the given sites.
inline std::vector<double> edt_sq_mm(const std::vector<std::int64_t>& sites, const Dims& d,
                                     const std::array<double, 3>& spacing) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(std::size_t(d.voxel_count()), kInf);
    for (std::int64_t s : sites) dist[std::size_t(s)] = 0.0;

    const int max_n = std::max({d.x, d.y, d.z});
    std::vector<double> line(static_cast<std::size_t>(max_n)), scratch(static_cast<std::size_t>(max_n));
    std::vector<int> v(static_cast<std::size_t>(max_n));
    std::vector<double> z(static_cast<std::size_t>(max_n) + 1);

    // x pass
    for (int zz = 0; zz < d.z; ++zz)
        for (int yy = 0; yy < d.y; ++yy) {
            const std::int64_t base = voxel_index(d, 0, yy, zz);
            for (int xx = 0; xx < d.x; ++xx) line[std::size_t(xx)] = dist[std::size_t(base + xx)];
            edt_1d(line, scratch, v, z, d.x, spacing[0]);
            for (int xx = 0; xx < d.x; ++xx) dist[std::size_t(base + xx)] = line[std::size_t(xx)];
        }
    // y pass
    for (int zz = 0; zz < d.z; ++zz)
        for (int xx = 0; xx < d.x; ++xx) {
            const std::int64_t base = voxel_index(d, xx, 0, zz);
            for (int yy = 0; yy < d.y; ++yy)
                line[std::size_t(yy)] = dist[std::size_t(base + std::int64_t(yy) * d.x)];
            edt_1d(line, scratch, v, z, d.y, spacing[1]);
            for (int yy = 0; yy < d.y; ++yy)
                dist[std::size_t(base + std::int64_t(yy) * d.x)] = line[std::size_t(yy)];
        }
    // z pass
    const std::int64_t plane = std::int64_t(d.x) * d.y;
    for (int yy = 0; yy < d.y; ++yy)
        for (int xx = 0; xx < d.x; ++xx) {
            const std::int64_t base = voxel_index(d, xx, yy, 0);
            for (int zz = 0; zz < d.z; ++zz)
                line[std::size_t(zz)] = dist[std::size_t(base + std::int64_t(zz) * plane)];
            edt_1d(line, scratch, v, z, d.z, spacing[2]);
            for (int zz = 0; zz < d.z; ++zz)
                dist[std::size_t(base + std::int64_t(zz) * plane)] = line[std::size_t(zz)];
        }
    return dist;
}

/// Percentile by linear interpolation on sorted data (rank = q*(n-1)).
inline double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double rank = q * double(values.size() - 1);
    const std::size_t lo = std::size_t(rank);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = rank - double(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace detail

/// Symmetric 95% Hausdorff distance in mm between two binary masks: the max
/// of the two directed 95th-percentile surface-to-surface distances.
inline double hd95(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b,
                   const Dims& dims, const std::array<double, 3>& spacing) {
    require(std::int64_t(a.size()) == dims.voxel_count() &&
                std::int64_t(b.size()) == dims.voxel_count(),
            "hd95: mask size does not match dims");
    const std::vector<std::int64_t> sa = detail::surface_voxels(a, dims);
    const std::vector<std::int64_t> sb = detail::surface_voxels(b, dims);
    require(!sa.empty(), "hd95: first mask is empty");
    require(!sb.empty(), "hd95: second mask is empty");

    const std::vector<double> dist_to_b = detail::edt_sq_mm(sb, dims, spacing);
    const std::vector<double> dist_to_a = detail::edt_sq_mm(sa, dims, spacing);
    std::vector<double> d_ab, d_ba;
    d_ab.reserve(sa.size());
    d_ba.reserve(sb.size());
    for (std::int64_t i : sa) d_ab.push_back(std::sqrt(dist_to_b[std::size_t(i)]));
    for (std::int64_t i : sb) d_ba.push_back(std::sqrt(dist_to_a[std::size_t(i)]));
    return std::max(detail::percentile(std::move(d_ab), 0.95),
                    detail::percentile(std::move(d_ba), 0.95));
}

inline std::vector<std::uint8_t> label_mask(const LabelVolume& l, std::int32_t label) {
    std::vector<std::uint8_t> m(l.labels.size());
    for (std::size_t i = 0; i < l.labels.size(); ++i) m[i] = l.labels[i] == label ? 1 : 0;
    return m;
}

inline double hd95(const LabelVolume& a, const LabelVolume& b, std::int32_t label) {
    require(a.dims == b.dims, "hd95: dims mismatch");
    return hd95(label_mask(a, label), label_mask(b, label), a.dims, a.spacing);
}

struct EndpointError {
    double mean = 0.0;
    double max = 0.0;
};

/// Mean/max Euclidean deviation between two fields over the interior region
/// obtained by shaving `margin` voxels off every face.
inline EndpointError endpoint_error(const DisplacementField& est, const DisplacementField& truth,
                                    int margin = 0) {
    require(est.dims == truth.dims, "endpoint_error: dims mismatch");
    const Dims d = est.dims;
    require(d.x > 2 * margin && d.y > 2 * margin && d.z > 2 * margin,
            "endpoint_error: margin leaves no interior");
    EndpointError e;
    std::int64_t n = 0;
    for (int z = margin; z < d.z - margin; ++z)
        for (int y = margin; y < d.y - margin; ++y)
            for (int x = margin; x < d.x - margin; ++x) {
                const std::int64_t idx = voxel_index(d, x, y, z);
                const double err = norm2(est.at(idx) - truth.at(idx));
                e.mean += err;
                e.max = std::max(e.max, err);
                ++n;
            }
    e.mean /= double(n);
    return e;
}

}  // namespace voxelopt
