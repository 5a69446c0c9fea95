#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace voxelopt {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }

inline double norm_inf(const Vec3& a) {
    return std::max({std::abs(a.x), std::abs(a.y), std::abs(a.z)});
}
inline double norm2_sq(const Vec3& a) { return a.x * a.x + a.y * a.y + a.z * a.z; }
inline double norm2(const Vec3& a) { return std::sqrt(norm2_sq(a)); }

/// Voxel counts per axis. Every grid type in this library stores values
/// row-major with x fastest: index = x + dims.x * (y + dims.y * z).
/// Multi-channel grids interleave channels last, so one voxel's channels
/// are contiguous: data[index * channels + c].
struct Dims {
    int x = 0;
    int y = 0;
    int z = 0;

    std::int64_t voxel_count() const {
        return std::int64_t(x) * std::int64_t(y) * std::int64_t(z);
    }
    int min_axis() const { return std::min({x, y, z}); }
    bool operator==(const Dims&) const = default;
};

inline std::string to_string(const Dims& d) {
    return std::to_string(d.x) + "x" + std::to_string(d.y) + "x" + std::to_string(d.z);
}

inline std::int64_t voxel_index(const Dims& d, int x, int y, int z) {
    return (std::int64_t(z) * d.y + y) * d.x + x;
}

/// Single-channel grid of reals; spacing is mm per axis.
struct ScalarVolume {
    Dims dims;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::vector<double> data;

    double at(int x, int y, int z) const { return data[voxel_index(dims, x, y, z)]; }
};

/// Multi-channel grid; the feature maps fed to the cost layer.
struct FeatureVolume {
    Dims dims;
    int channels = 1;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::vector<double> data;

    double at(int x, int y, int z, int c) const {
        return data[voxel_index(dims, x, y, z) * channels + c];
    }
};

/// Per-voxel 3-vectors in voxel units of this grid, component order x,y,z.
struct DisplacementField {
    Dims dims;
    std::vector<double> data;  // 3 per voxel

    Vec3 at(std::int64_t idx) const {
        return {data[3 * idx], data[3 * idx + 1], data[3 * idx + 2]};
    }
    Vec3 at(int x, int y, int z) const { return at(voxel_index(dims, x, y, z)); }
    void set(std::int64_t idx, const Vec3& v) {
        data[3 * idx] = v.x;
        data[3 * idx + 1] = v.y;
        data[3 * idx + 2] = v.z;
    }
};

/// Integer segmentation labels; label 0 is background.
struct LabelVolume {
    Dims dims;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::vector<std::int32_t> labels;

    std::int32_t at(int x, int y, int z) const { return labels[voxel_index(dims, x, y, z)]; }
};

inline DisplacementField make_zero_field(const Dims& dims) {
    DisplacementField u;
    u.dims = dims;
    u.data.assign(std::size_t(dims.voxel_count()) * 3, 0.0);
    return u;
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(const std::vector<double>& v) {
    for (double d : v)
        if (!std::isfinite(d)) return false;
    return true;
}

inline void validate_dims(const Dims& d) {
    require(d.x >= 1 && d.y >= 1 && d.z >= 1, "dims: every axis must be >= 1, got " + to_string(d));
}

inline void validate_spacing(const std::array<double, 3>& s) {
    require(s[0] > 0 && s[1] > 0 && s[2] > 0, "spacing: every axis must be > 0");
}

inline void validate(const ScalarVolume& v) {
    validate_dims(v.dims);
    validate_spacing(v.spacing);
    require(std::int64_t(v.data.size()) == v.dims.voxel_count(),
            "scalar volume: data length does not match dims " + to_string(v.dims));
    require(all_finite(v.data), "scalar volume: non-finite value");
}

inline void validate(const FeatureVolume& v) {
    validate_dims(v.dims);
    validate_spacing(v.spacing);
    require(v.channels >= 1, "feature volume: channels must be >= 1");
    require(std::int64_t(v.data.size()) == v.dims.voxel_count() * v.channels,
            "feature volume: data length does not match dims " + to_string(v.dims));
    require(all_finite(v.data), "feature volume: non-finite value");
}

inline void validate(const DisplacementField& u) {
    validate_dims(u.dims);
    require(std::int64_t(u.data.size()) == u.dims.voxel_count() * 3,
            "displacement field: data length does not match dims " + to_string(u.dims));
    require(all_finite(u.data), "displacement field: non-finite value");
}

/// Single-channel view conversions used by the CLI and synth paths.
inline FeatureVolume to_feature(const ScalarVolume& v) {
    FeatureVolume f;
    f.dims = v.dims;
    f.channels = 1;
    f.spacing = v.spacing;
    f.data = v.data;
    return f;
}

inline ScalarVolume to_scalar(const FeatureVolume& f) {
    require(f.channels == 1, "to_scalar: feature volume has more than one channel");
    ScalarVolume v;
    v.dims = f.dims;
    v.spacing = f.spacing;
    v.data = f.data;
    return v;
}

}  // namespace voxelopt
