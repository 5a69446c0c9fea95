#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <zlib.h>

#include "voxelopt/types.hpp"

namespace voxelopt {

/// The 348-byte NIfTI-1 header. Field offsets follow the standard exactly;
/// the layout is naturally packed.
struct Nifti1Header {
    std::int32_t sizeof_hdr = 348;
    char data_type[10] = {};
    char db_name[18] = {};
    std::int32_t extents = 0;
    std::int16_t session_error = 0;
    char regular = 'r';
    char dim_info = 0;
    std::int16_t dim[8] = {};
    float intent_p1 = 0, intent_p2 = 0, intent_p3 = 0;
    std::int16_t intent_code = 0;
    std::int16_t datatype = 0;
    std::int16_t bitpix = 0;
    std::int16_t slice_start = 0;
    float pixdim[8] = {};
    float vox_offset = 352;
    float scl_slope = 0, scl_inter = 0;
    std::int16_t slice_end = 0;
    char slice_code = 0;
    char xyzt_units = 0;
    float cal_max = 0, cal_min = 0;
    float slice_duration = 0;
    float toffset = 0;
    std::int32_t glmax = 0, glmin = 0;
    char descrip[80] = {};
    char aux_file[24] = {};
    std::int16_t qform_code = 0;
    std::int16_t sform_code = 0;
    float quatern_b = 0, quatern_c = 0, quatern_d = 0;
    float qoffset_x = 0, qoffset_y = 0, qoffset_z = 0;
    float srow_x[4] = {};
    float srow_y[4] = {};
    float srow_z[4] = {};
    char intent_name[16] = {};
    char magic[4] = {};
};
static_assert(sizeof(Nifti1Header) == 348, "Nifti1Header must be exactly 348 bytes");

enum NiftiDatatype : std::int16_t {
    kNiftiUint8 = 2,
    kNiftiInt16 = 4,
    kNiftiInt32 = 8,
    kNiftiFloat32 = 16,
    kNiftiFloat64 = 64,
};

constexpr std::int16_t kNiftiIntentVector = 1007;

namespace detail {

inline int nifti_bitpix(std::int16_t datatype) {
    switch (datatype) {
        case kNiftiUint8: return 8;
        case kNiftiInt16: return 16;
        case kNiftiInt32: return 32;
        case kNiftiFloat32: return 32;
        case kNiftiFloat64: return 64;
        default: return 0;
    }
}

inline void swap_bytes(void* p, int width) {
    auto* b = static_cast<unsigned char*>(p);
    for (int i = 0; i < width / 2; ++i) std::swap(b[i], b[width - 1 - i]);
}

inline void swap_header(Nifti1Header& h) {
    swap_bytes(&h.sizeof_hdr, 4);
    swap_bytes(&h.extents, 4);
    swap_bytes(&h.session_error, 2);
    for (auto& v : h.dim) swap_bytes(&v, 2);
    swap_bytes(&h.intent_p1, 4);
    swap_bytes(&h.intent_p2, 4);
    swap_bytes(&h.intent_p3, 4);
    swap_bytes(&h.intent_code, 2);
    swap_bytes(&h.datatype, 2);
    swap_bytes(&h.bitpix, 2);
    swap_bytes(&h.slice_start, 2);
    for (auto& v : h.pixdim) swap_bytes(&v, 4);
    swap_bytes(&h.vox_offset, 4);
    swap_bytes(&h.scl_slope, 4);
    swap_bytes(&h.scl_inter, 4);
    swap_bytes(&h.slice_end, 2);
    swap_bytes(&h.cal_max, 4);
    swap_bytes(&h.cal_min, 4);
    swap_bytes(&h.slice_duration, 4);
    swap_bytes(&h.toffset, 4);
    swap_bytes(&h.glmax, 4);
    swap_bytes(&h.glmin, 4);
    swap_bytes(&h.qform_code, 2);
    swap_bytes(&h.sform_code, 2);
    swap_bytes(&h.quatern_b, 4);
    swap_bytes(&h.quatern_c, 4);
    swap_bytes(&h.quatern_d, 4);
    swap_bytes(&h.qoffset_x, 4);
    swap_bytes(&h.qoffset_y, 4);
    swap_bytes(&h.qoffset_z, 4);
    for (auto& v : h.srow_x) swap_bytes(&v, 4);
    for (auto& v : h.srow_y) swap_bytes(&v, 4);
    for (auto& v : h.srow_z) swap_bytes(&v, 4);
}

/// Reader handle; zlib reads gzip and plain files transparently.
class GzReader {
  public:
    explicit GzReader(const std::string& path) : path_(path), file_(gzopen(path.c_str(), "rb")) {
        if (!file_) throw std::runtime_error(path + ": cannot open for reading");
    }
    ~GzReader() {
        if (file_) gzclose(file_);
    }
    GzReader(const GzReader&) = delete;
    GzReader& operator=(const GzReader&) = delete;

    void read_exact(void* dst, std::size_t n, const std::string& what) {
        auto* p = static_cast<unsigned char*>(dst);
        std::size_t done = 0;
        while (done < n) {
            const unsigned chunk = unsigned(std::min<std::size_t>(n - done, 1u << 28));
            const int got = gzread(file_, p + done, chunk);
            if (got <= 0) throw std::runtime_error(path_ + ": truncated " + what);
            done += std::size_t(got);
        }
    }
    void skip(std::size_t n) {
        std::vector<char> junk(std::min<std::size_t>(n, 1 << 16));
        std::size_t done = 0;
        while (done < n) {
            const unsigned chunk = unsigned(std::min(n - done, junk.size()));
            const int got = gzread(file_, junk.data(), chunk);
            if (got <= 0) throw std::runtime_error(path_ + ": truncated file");
            done += std::size_t(got);
        }
    }

  private:
    std::string path_;
    gzFile file_;
};

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Writer handle; compresses when the path ends in .gz.
class GzWriter {
  public:
    explicit GzWriter(const std::string& path) : path_(path) {
        if (ends_with(path, ".gz")) {
            gz_ = gzopen(path.c_str(), "wb");
            if (!gz_) throw std::runtime_error(path + ": cannot open for writing");
        } else {
            plain_.open(path, std::ios::binary | std::ios::trunc);
            if (!plain_) throw std::runtime_error(path + ": cannot open for writing");
        }
    }
    ~GzWriter() {
        if (gz_) gzclose(gz_);
    }
    GzWriter(const GzWriter&) = delete;
    GzWriter& operator=(const GzWriter&) = delete;

    void write(const void* src, std::size_t n) {
        if (gz_) {
            const auto* p = static_cast<const unsigned char*>(src);
            std::size_t done = 0;
            while (done < n) {
                const unsigned chunk = unsigned(std::min<std::size_t>(n - done, 1u << 28));
                if (gzwrite(gz_, p + done, chunk) != int(chunk))
                    throw std::runtime_error(path_ + ": write failed");
                done += chunk;
            }
        } else {
            plain_.write(static_cast<const char*>(src), std::streamsize(n));
            if (!plain_) throw std::runtime_error(path_ + ": write failed");
        }
    }
    void close() {
        if (gz_) {
            if (gzclose(gz_) != Z_OK) throw std::runtime_error(path_ + ": close failed");
            gz_ = nullptr;
        } else {
            plain_.close();
            if (plain_.fail()) throw std::runtime_error(path_ + ": close failed");
        }
    }

  private:
    std::string path_;
    gzFile gz_ = nullptr;
    std::ofstream plain_;
};

template <class T>
void decode_payload(const std::vector<unsigned char>& raw, std::vector<double>& out, bool swap) {
    const std::size_t n = raw.size() / sizeof(T);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        T v;
        std::memcpy(&v, raw.data() + i * sizeof(T), sizeof(T));
        if (swap && sizeof(T) > 1) swap_bytes(&v, sizeof(T));
        out[i] = double(v);
    }
}

template <class T>
void encode_payload(const std::vector<double>& data, std::vector<unsigned char>& raw) {
    raw.resize(data.size() * sizeof(T));
    for (std::size_t i = 0; i < data.size(); ++i) {
        T v;
        if constexpr (std::is_floating_point_v<T>) {
            v = T(data[i]);
        } else {
            const long long r = std::llround(data[i]);
            const long long lo = (std::numeric_limits<T>::min)();
            const long long hi = (std::numeric_limits<T>::max)();
            v = T(std::clamp(r, lo, hi));
        }
        std::memcpy(raw.data() + i * sizeof(T), &v, sizeof(T));
    }
}

}  // namespace detail

/// A decoded single-file NIfTI-1 volume. `data` keeps the file's planar
/// component order (all x-components, then y, then z for vector files) after
/// applying scl_slope/scl_inter; the post-swap header is preserved verbatim
/// so writers can round-trip orientation metadata.
struct NiftiVolume {
    Nifti1Header header;
    Dims dims;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    int components = 1;
    std::vector<double> data;

    ScalarVolume as_scalar() const {
        if (components != 1)
            throw std::runtime_error("nifti: expected a scalar volume, file has " +
                                     std::to_string(components) + " components");
        ScalarVolume v;
        v.dims = dims;
        v.spacing = spacing;
        v.data = data;
        return v;
    }

    LabelVolume as_labels() const {
        if (components != 1)
            throw std::runtime_error("nifti: expected a label volume, file has " +
                                     std::to_string(components) + " components");
        LabelVolume l;
        l.dims = dims;
        l.spacing = spacing;
        l.labels.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double r = std::round(data[i]);
            if (std::abs(data[i] - r) > 1e-6 || r < 0)
                throw std::runtime_error("nifti: label volume has non-integer or negative value " +
                                         std::to_string(data[i]));
            l.labels[i] = std::int32_t(r);
        }
        return l;
    }

    DisplacementField as_field() const {
        if (components != 3)
            throw std::runtime_error("nifti: expected a 3-component vector field, file has " +
                                     std::to_string(components) + " components");
        DisplacementField u;
        u.dims = dims;
        const std::int64_t n = dims.voxel_count();
        u.data.resize(std::size_t(n) * 3);
        for (int c = 0; c < 3; ++c)
            for (std::int64_t i = 0; i < n; ++i)
                u.data[std::size_t(i) * 3 + std::size_t(c)] = data[std::size_t(c * n + i)];
        return u;
    }
};

/// Reads a single-file NIfTI-1 volume (.nii or .nii.gz). Detached "ni1"
/// pairs are rejected; big-endian files are detected via the dim[0] heuristic
/// and byte-swapped. scl_slope/scl_inter are applied when slope is nonzero.
inline NiftiVolume read_nifti(const std::string& path) {
    detail::GzReader in(path);
    Nifti1Header h;
    in.read_exact(&h, sizeof(h), "header");

    bool swap = false;
    if (h.dim[0] < 1 || h.dim[0] > 7) {
        swap = true;
        detail::swap_header(h);
        if (h.dim[0] < 1 || h.dim[0] > 7)
            throw std::runtime_error(path + ": not a NIfTI-1 file (bad dim[0] in either byte order)");
    }
    if (std::memcmp(h.magic, "ni1", 4) == 0)
        throw std::runtime_error(path + ": detached header/image NIfTI (magic \"ni1\") is not supported");
    if (std::memcmp(h.magic, "n+1", 4) != 0)
        throw std::runtime_error(path + ": not a single-file NIfTI-1 volume (bad magic)");
    if (h.sizeof_hdr != 348)
        throw std::runtime_error(path + ": bad sizeof_hdr " + std::to_string(h.sizeof_hdr));

    const int bitpix = detail::nifti_bitpix(h.datatype);
    if (bitpix == 0)
        throw std::runtime_error(path + ": unsupported NIfTI datatype " + std::to_string(h.datatype));

    if (h.dim[0] < 3 || h.dim[0] > 5)
        throw std::runtime_error(path + ": unsupported dimensionality dim[0]=" + std::to_string(h.dim[0]));
    for (int i = 1; i <= h.dim[0]; ++i)
        if (h.dim[i] < 1)
            throw std::runtime_error(path + ": non-positive dim[" + std::to_string(i) + "]");
    if (h.dim[0] >= 4 && h.dim[4] != 1)
        throw std::runtime_error(path + ": time series (dim[4]=" + std::to_string(h.dim[4]) +
                                 ") are not supported");
    const int components = h.dim[0] == 5 ? h.dim[5] : 1;

    NiftiVolume vol;
    vol.header = h;
    vol.dims = {h.dim[1], h.dim[2], h.dim[3]};
    for (int i = 0; i < 3; ++i) {
        const double p = double(h.pixdim[i + 1]);
        vol.spacing[std::size_t(i)] = (std::isfinite(p) && p > 0) ? p : 1.0;
    }
    vol.components = components;

    const std::int64_t n_values = vol.dims.voxel_count() * components;
    if (n_values <= 0 || n_values > (std::int64_t(1) << 33))
        throw std::runtime_error(path + ": implausible volume size");

    const double off = double(h.vox_offset);
    if (!(off >= 348))
        throw std::runtime_error(path + ": bad vox_offset " + std::to_string(off));
    in.skip(std::size_t(off) - sizeof(h));

    std::vector<unsigned char> raw(std::size_t(n_values) * std::size_t(bitpix / 8));
    in.read_exact(raw.data(), raw.size(), "payload");

    switch (h.datatype) {
        case kNiftiUint8: detail::decode_payload<std::uint8_t>(raw, vol.data, swap); break;
        case kNiftiInt16: detail::decode_payload<std::int16_t>(raw, vol.data, swap); break;
        case kNiftiInt32: detail::decode_payload<std::int32_t>(raw, vol.data, swap); break;
        case kNiftiFloat32: detail::decode_payload<float>(raw, vol.data, swap); break;
        case kNiftiFloat64: detail::decode_payload<double>(raw, vol.data, swap); break;
        default: throw std::runtime_error(path + ": unsupported NIfTI datatype");
    }

    if (h.scl_slope != 0.0f && !(h.scl_slope == 1.0f && h.scl_inter == 0.0f)) {
        const double slope = double(h.scl_slope), inter = double(h.scl_inter);
        for (double& v : vol.data) v = v * slope + inter;
    }
    return vol;
}

namespace detail {

/// Builds a write header, copying orientation and descriptive fields from a
/// template when given, then forcing the structural fields.
inline Nifti1Header make_write_header(const Dims& dims, const std::array<double, 3>& spacing,
                                      int components, std::int16_t datatype,
                                      const Nifti1Header* tmpl, std::int16_t intent_code) {
    Nifti1Header h;
    if (tmpl) h = *tmpl;
    h.sizeof_hdr = 348;
    std::memset(h.dim, 0, sizeof(h.dim));
    h.dim[0] = components > 1 ? 5 : 3;
    h.dim[1] = std::int16_t(dims.x);
    h.dim[2] = std::int16_t(dims.y);
    h.dim[3] = std::int16_t(dims.z);
    if (components > 1) {
        h.dim[4] = 1;
        h.dim[5] = std::int16_t(components);
        h.intent_code = intent_code;
    }
    h.datatype = datatype;
    h.bitpix = std::int16_t(nifti_bitpix(datatype));
    if (h.pixdim[0] == 0.0f) h.pixdim[0] = 1.0f;
    h.pixdim[1] = float(spacing[0]);
    h.pixdim[2] = float(spacing[1]);
    h.pixdim[3] = float(spacing[2]);
    h.vox_offset = 352;
    h.scl_slope = 1.0f;
    h.scl_inter = 0.0f;
    std::memcpy(h.magic, "n+1", 4);
    return h;
}

inline void write_nifti_planar(const std::string& path, const Dims& dims,
                               const std::array<double, 3>& spacing, int components,
                               const std::vector<double>& planar, std::int16_t datatype,
                               const Nifti1Header* tmpl, std::int16_t intent_code) {
    require(dims.x <= 32767 && dims.y <= 32767 && dims.z <= 32767,
            "nifti: dims exceed the int16 header range");
    const Nifti1Header h = make_write_header(dims, spacing, components, datatype, tmpl, intent_code);

    std::vector<unsigned char> raw;
    switch (datatype) {
        case kNiftiUint8: encode_payload<std::uint8_t>(planar, raw); break;
        case kNiftiInt16: encode_payload<std::int16_t>(planar, raw); break;
        case kNiftiInt32: encode_payload<std::int32_t>(planar, raw); break;
        case kNiftiFloat32: encode_payload<float>(planar, raw); break;
        case kNiftiFloat64: encode_payload<double>(planar, raw); break;
        default: throw std::runtime_error(path + ": unsupported write datatype " + std::to_string(datatype));
    }

    GzWriter out(path);
    out.write(&h, sizeof(h));
    const char pad[4] = {0, 0, 0, 0};  // empty extension flag
    out.write(pad, 4);
    out.write(raw.data(), raw.size());
    out.close();
}

}  // namespace detail

inline void write_nifti(const ScalarVolume& v, const std::string& path,
                        std::int16_t datatype = kNiftiFloat32, const Nifti1Header* tmpl = nullptr) {
    validate(v);
    detail::write_nifti_planar(path, v.dims, v.spacing, 1, v.data, datatype, tmpl, 0);
}

inline void write_nifti(const LabelVolume& l, const std::string& path,
                        std::int16_t datatype = kNiftiInt32, const Nifti1Header* tmpl = nullptr) {
    std::vector<double> tmp(l.labels.begin(), l.labels.end());
    detail::write_nifti_planar(path, l.dims, l.spacing, 1, tmp, datatype, tmpl, 0);
}

inline void write_nifti(const DisplacementField& u, const std::string& path,
                        const std::array<double, 3>& spacing = {1.0, 1.0, 1.0},
                        std::int16_t datatype = kNiftiFloat32, const Nifti1Header* tmpl = nullptr) {
    validate(u);
    const std::int64_t n = u.dims.voxel_count();
    std::vector<double> planar(std::size_t(n) * 3);
    for (int c = 0; c < 3; ++c)
        for (std::int64_t i = 0; i < n; ++i)
            planar[std::size_t(c * n + i)] = u.data[std::size_t(i) * 3 + std::size_t(c)];
    detail::write_nifti_planar(path, u.dims, spacing, 3, planar, datatype, tmpl, kNiftiIntentVector);
}

}  // namespace voxelopt
