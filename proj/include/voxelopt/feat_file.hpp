#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxelopt/types.hpp"

namespace voxelopt {

/// VOXF feature container: little-endian binary with magic "VOXF",
/// version u32, dims x/y/z u32, channels u32, dtype u32 (0 = float32),
/// spacing f32 x3, then h*w*d*c float32 values row-major x fastest with
/// channels interleaved last (the in-memory layout).
namespace featfile {

constexpr char kMagic[4] = {'V', 'O', 'X', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kDtypeFloat32 = 0;

}  // namespace featfile

inline void write_feat(const FeatureVolume& f, const std::string& path) {
    validate(f);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");

    const auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    const auto put_f32 = [&](float v) { out.write(reinterpret_cast<const char*>(&v), 4); };

    out.write(featfile::kMagic, 4);
    put_u32(featfile::kVersion);
    put_u32(std::uint32_t(f.dims.x));
    put_u32(std::uint32_t(f.dims.y));
    put_u32(std::uint32_t(f.dims.z));
    put_u32(std::uint32_t(f.channels));
    put_u32(featfile::kDtypeFloat32);
    for (int i = 0; i < 3; ++i) put_f32(float(f.spacing[std::size_t(i)]));

    std::vector<float> payload(f.data.size());
    for (std::size_t i = 0; i < f.data.size(); ++i) payload[i] = float(f.data[i]);
    out.write(reinterpret_cast<const char*>(payload.data()),
              std::streamsize(payload.size() * sizeof(float)));
    if (!out) throw std::runtime_error(path + ": write failed");
}

inline FeatureVolume read_feat(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, featfile::kMagic, 4) != 0)
        throw std::runtime_error(path + ": not a VOXF feature container (bad magic)");

    const auto get_u32 = [&](const char* what) {
        std::uint32_t v;
        in.read(reinterpret_cast<char*>(&v), 4);
        if (!in) throw std::runtime_error(path + ": truncated header (" + std::string(what) + ")");
        return v;
    };
    const std::uint32_t version = get_u32("version");
    if (version != featfile::kVersion)
        throw std::runtime_error(path + ": unsupported VOXF version " + std::to_string(version));

    FeatureVolume f;
    f.dims.x = int(get_u32("dims"));
    f.dims.y = int(get_u32("dims"));
    f.dims.z = int(get_u32("dims"));
    f.channels = int(get_u32("channels"));
    const std::uint32_t dtype = get_u32("dtype");
    if (dtype != featfile::kDtypeFloat32)
        throw std::runtime_error(path + ": unsupported VOXF dtype tag " + std::to_string(dtype));
    for (int i = 0; i < 3; ++i) {
        float s;
        in.read(reinterpret_cast<char*>(&s), 4);
        if (!in) throw std::runtime_error(path + ": truncated header (spacing)");
        f.spacing[std::size_t(i)] = double(s);
    }
    if (f.dims.x < 1 || f.dims.y < 1 || f.dims.z < 1 || f.channels < 1 ||
        f.dims.voxel_count() * f.channels > (std::int64_t(1) << 33))
        throw std::runtime_error(path + ": implausible VOXF dims/channels");

    const std::size_t n = std::size_t(f.dims.voxel_count()) * std::size_t(f.channels);
    std::vector<float> payload(n);
    in.read(reinterpret_cast<char*>(payload.data()), std::streamsize(n * sizeof(float)));
    if (std::size_t(in.gcount()) != n * sizeof(float))
        throw std::runtime_error(path + ": truncated VOXF payload");

    f.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.data[i] = double(payload[i]);
    validate(f);
    return f;
}

/// External foundation-model features, consumed verbatim; the file's grid
/// must match the paired image grid.
inline FeatureVolume load_external(const std::string& path, const Dims& expected) {
    FeatureVolume f = read_feat(path);
    if (!(f.dims == expected))
        throw std::runtime_error(path + ": feature grid " + to_string(f.dims) +
                                 " does not match the image grid " + to_string(expected));
    return f;
}

}  // namespace voxelopt
