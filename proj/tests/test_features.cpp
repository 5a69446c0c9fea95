#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "voxelopt/features.hpp"

using namespace voxelopt;
namespace ts = voxelopt::testsupport;

namespace {

// Independent dense MIND reimplementation: recomputes patch weights inline
// and loops voxels/offsets/taps in a different nesting order.
FeatureVolume oracle_mind(const ScalarVolume& vol, double sigma_patch) {
    const Dims d = vol.dims;
    const int offs[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
    FeatureVolume out;
    out.dims = d;
    out.channels = 6;
    out.spacing = vol.spacing;
    out.data.resize(std::size_t(d.voxel_count()) * 6);

    double wsum = 0.0;
    for (int tz = -1; tz <= 1; ++tz)
        for (int ty = -1; ty <= 1; ++ty)
            for (int tx = -1; tx <= 1; ++tx)
                wsum += std::exp(-(tx * tx + ty * ty + tz * tz) / (2.0 * sigma_patch * sigma_patch));

    const auto cl = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    for (int z = 0; z < d.z; ++z)
        for (int y = 0; y < d.y; ++y)
            for (int x = 0; x < d.x; ++x) {
                double dist[6];
                for (int r = 0; r < 6; ++r) {
                    double acc = 0.0;
                    for (int tz = -1; tz <= 1; ++tz)
                        for (int ty = -1; ty <= 1; ++ty)
                            for (int tx = -1; tx <= 1; ++tx) {
                                const double w =
                                    std::exp(-(tx * tx + ty * ty + tz * tz) /
                                             (2.0 * sigma_patch * sigma_patch)) /
                                    wsum;
                                const double a = vol.at(cl(x + tx, d.x - 1), cl(y + ty, d.y - 1),
                                                        cl(z + tz, d.z - 1));
                                const double b = vol.at(cl(x + offs[r][0] + tx, d.x - 1),
                                                        cl(y + offs[r][1] + ty, d.y - 1),
                                                        cl(z + offs[r][2] + tz, d.z - 1));
                                acc += w * (a - b) * (a - b);
                            }
                    dist[r] = acc;
                }
                double variance = (dist[0] + dist[1] + dist[2] + dist[3] + dist[4] + dist[5]) / 6.0;
                if (variance < 1e-6) variance = 1e-6;
                double mx = 0.0;
                double ch[6];
                for (int r = 0; r < 6; ++r) {
                    ch[r] = std::exp(-dist[r] / variance);
                    mx = std::max(mx, ch[r]);
                }
                for (int r = 0; r < 6; ++r)
                    out.data[std::size_t(voxel_index(d, x, y, z) * 6 + r)] = ch[r] / mx;
            }
    return out;
}

}  // namespace

TEST_CASE("raw_feature leaves a full-range [0,1] volume unchanged", "[features]") {
    ScalarVolume v = ts::random_scalar({4, 4, 4}, 3);
    v.data[0] = 0.0;
    v.data[1] = 1.0;  // pin the post-clip min/max
    const FeatureVolume f = raw_feature(v, 0.0, 1.0);
    REQUIRE(f.channels == 1);
    REQUIRE(f.data == v.data);
}

TEST_CASE("raw_feature maps a constant volume to zeros", "[features]") {
    ScalarVolume v = ts::random_scalar({3, 3, 3}, 4);
    std::fill(v.data.begin(), v.data.end(), 123.0);
    const FeatureVolume f = raw_feature(v);
    for (double x : f.data) REQUIRE(x == 0.0);
}

TEST_CASE("raw_feature matches hand-computed clip and scale on CT-range values", "[features]") {
    ScalarVolume v;
    v.dims = {5, 1, 1};
    v.data = {-1000.0, -800.0, 0.0, 500.0, 700.0};
    const FeatureVolume f = raw_feature(v, -800.0, 500.0);
    // post-clip values: -800, -800, 0, 500, 500 -> min -800, max 500
    REQUIRE(f.data[0] == Catch::Approx(0.0));
    REQUIRE(f.data[1] == Catch::Approx(0.0));
    REQUIRE(f.data[2] == Catch::Approx(800.0 / 1300.0).margin(1e-12));
    REQUIRE(f.data[3] == Catch::Approx(1.0));
    REQUIRE(f.data[4] == Catch::Approx(1.0));
}

TEST_CASE("raw_feature output lies in [0,1]", "[features]") {
    const ScalarVolume v = ts::random_scalar({6, 6, 6}, 5, -2000.0, 2000.0);
    const FeatureVolume f = raw_feature(v);
    for (double x : f.data) {
        REQUIRE(x >= 0.0);
        REQUIRE(x <= 1.0);
    }
}

TEST_CASE("mind_extract of a constant volume is all ones", "[features]") {
    ScalarVolume v = ts::random_scalar({4, 4, 4}, 6);
    std::fill(v.data.begin(), v.data.end(), 0.5);
    const FeatureVolume f = mind_extract(v);
    REQUIRE(f.channels == 6);
    for (double x : f.data) REQUIRE(x == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("mind_extract at an isolated bright voxel has six equal channels", "[features]") {
    ScalarVolume v;
    v.dims = {7, 7, 7};
    v.data.assign(343, 0.0);
    v.data[std::size_t(voxel_index(v.dims, 3, 3, 3))] = 1.0;
    const FeatureVolume f = mind_extract(v);
    const double first = f.at(3, 3, 3, 0);
    for (int c = 1; c < 6; ++c) REQUIRE(f.at(3, 3, 3, c) == Catch::Approx(first).margin(1e-14));
    REQUIRE(first == Catch::Approx(1.0).margin(1e-14));  // equal channels normalize to 1
}

TEST_CASE("mind_extract matches the dense oracle on a random volume", "[features]") {
    const ScalarVolume v = ts::random_scalar({7, 7, 7}, 7);
    const FeatureVolume got = mind_extract(v);
    const FeatureVolume want = oracle_mind(v, 0.5);
    REQUIRE(ts::max_abs_diff(got.data, want.data) < 1e-12);
}

TEST_CASE("mind_extract is invariant to affine intensity rescaling", "[features]") {
    const ScalarVolume v = ts::random_scalar({7, 7, 7}, 8);
    ScalarVolume w = v;
    for (double& x : w.data) x = 2.3 * x + 5.0;
    const FeatureVolume a = mind_extract(v);
    const FeatureVolume b = mind_extract(w);
    REQUIRE(ts::max_abs_diff(a.data, b.data) < 1e-6);
}

TEST_CASE("mind_extract output lies in (0,1] with a unit channel per voxel", "[features]") {
    const ScalarVolume v = ts::random_scalar({6, 5, 7}, 9);
    const FeatureVolume f = mind_extract(v);
    for (std::int64_t i = 0; i < v.dims.voxel_count(); ++i) {
        double mx = 0.0;
        for (int c = 0; c < 6; ++c) {
            const double x = f.data[std::size_t(i * 6 + c)];
            REQUIRE(x > 0.0);
            REQUIRE(x <= 1.0);
            mx = std::max(mx, x);
        }
        REQUIRE(mx == 1.0);
    }
}

TEST_CASE("mind_extract rejects volumes below 3 voxels per axis", "[features]") {
    REQUIRE_THROWS_AS(mind_extract(ts::random_scalar({2, 5, 5}, 10)), std::invalid_argument);
}

TEST_CASE("zscore_channels standardizes each channel", "[features]") {
    FeatureVolume f = ts::random_feature({6, 6, 6}, 3, 11, -4.0, 9.0);
    zscore_channels(f);
    const std::int64_t n = f.dims.voxel_count();
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        for (std::int64_t i = 0; i < n; ++i) mean += f.data[std::size_t(i * 3 + c)];
        mean /= double(n);
        for (std::int64_t i = 0; i < n; ++i) {
            const double d = f.data[std::size_t(i * 3 + c)] - mean;
            var += d * d;
        }
        REQUIRE(mean == Catch::Approx(0.0).margin(1e-10));
        REQUIRE(std::sqrt(var / double(n)) == Catch::Approx(1.0).margin(1e-10));
    }
}
