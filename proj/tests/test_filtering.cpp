#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "test_support.hpp"
#include "voxelopt/gaussian_filter.hpp"

using namespace voxelopt;
namespace ts = voxelopt::testsupport;

namespace {

SigmaMap uniform_sigma(const Dims& d, double s) {
    SigmaMap m;
    m.dims = d;
    m.values.assign(std::size_t(d.voxel_count()), s);
    return m;
}

}  // namespace

TEST_CASE("gaussian_1d_pass with sigma 0 is the exact identity", "[filtering]") {
    const Dims d{7, 5, 4};
    const DisplacementField u = ts::random_field(d, 2.0, 9);
    const auto out = gaussian_1d_pass(u.data, d, 3, 0, GaussianSpec::isotropic(0.0));
    REQUIRE(out == u.data);
}

TEST_CASE("gaussian_1d_pass preserves constants", "[filtering]") {
    const Dims d{9, 6, 5};
    std::vector<double> in(std::size_t(d.voxel_count()), 1.37);
    for (int axis = 0; axis < 3; ++axis) {
        const auto out = gaussian_1d_pass(in, d, 1, axis, GaussianSpec::isotropic(2.1));
        for (double v : out) REQUIRE(v == Catch::Approx(1.37).margin(1e-12));
    }
}

TEST_CASE("gaussian_1d_pass matches direct 1D convolution with clamped kernel", "[filtering]") {
    const int n = 33;
    const Dims d{n, 1, 1};
    const ScalarVolume s = ts::random_scalar(d, 77);
    const auto got = gaussian_1d_pass(s.data, d, 1, 0, GaussianSpec::isotropic(1.0));
    const auto want = oracles::gauss1d_dense_x(s.data, n, 1.0);
    REQUIRE(ts::max_abs_diff(got, want) < 1e-12);
}

TEST_CASE("filter_field leaves constant fields unchanged", "[filtering]") {
    const Dims d{6, 6, 6};
    DisplacementField u = make_zero_field(d);
    for (std::int64_t i = 0; i < d.voxel_count(); ++i) u.set(i, {0.4, -1.2, 2.0});
    const DisplacementField f = filter_field(u, GaussianSpec::isotropic(1.5));
    for (std::int64_t i = 0; i < d.voxel_count(); ++i) {
        REQUIRE(f.at(i).x == Catch::Approx(0.4).margin(1e-12));
        REQUIRE(f.at(i).y == Catch::Approx(-1.2).margin(1e-12));
        REQUIRE(f.at(i).z == Catch::Approx(2.0).margin(1e-12));
    }
}

TEST_CASE("isotropic field filtering matches the dense 3D Gaussian oracle", "[filtering]") {
    const Dims d{9, 9, 9};
    const DisplacementField u = ts::random_field(d, 3.0, 81);
    const DisplacementField got = filter_field(u, GaussianSpec::isotropic(1.5));
    const auto want = oracles::gauss3d_dense(u.data, d, 3, 1.5);
    REQUIRE(ts::max_abs_diff(got.data, want) < 1e-5);
}

TEST_CASE("adaptive filtering with a uniform sigma map equals isotropic filtering", "[filtering]") {
    const Dims d{8, 7, 6};
    const DisplacementField u = ts::random_field(d, 2.0, 83);
    const SigmaMap map = uniform_sigma(d, 0.9);
    const DisplacementField a = filter_field(u, GaussianSpec::adaptive(map));
    const DisplacementField b = filter_field(u, GaussianSpec::isotropic(0.9));
    REQUIRE(a.data == b.data);
}

TEST_CASE("a voxel with sigma 0 is a bitwise fixed point of adaptive filtering", "[filtering]") {
    const Dims d{9, 9, 9};
    std::mt19937 rng(85);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const DisplacementField u = ts::random_field(d, 5.0, 86);
    SigmaMap map = uniform_sigma(d, 0.0);
    std::vector<std::int64_t> pinned;
    for (std::int64_t i = 0; i < d.voxel_count(); ++i) {
        if (uni(rng) < 0.2)
            pinned.push_back(i);
        else
            map.values[std::size_t(i)] = 0.3 + 1.2 * uni(rng);
    }
    const DisplacementField f = filter_field(u, GaussianSpec::adaptive(map));
    for (std::int64_t i : pinned) {
        REQUIRE(f.data[std::size_t(3 * i)] == u.data[std::size_t(3 * i)]);
        REQUIRE(f.data[std::size_t(3 * i + 1)] == u.data[std::size_t(3 * i + 1)]);
        REQUIRE(f.data[std::size_t(3 * i + 2)] == u.data[std::size_t(3 * i + 2)]);
    }
}

TEST_CASE("filtering never leaves the input range", "[filtering]") {
    const Dims d{8, 8, 8};
    std::mt19937 rng(87);
    std::uniform_real_distribution<double> uni(0.0, 2.0);
    const DisplacementField u = ts::random_field(d, 4.0, 88);
    SigmaMap map = uniform_sigma(d, 0.0);
    for (double& s : map.values) s = uni(rng);
    double mn[3], mx[3];
    for (int c = 0; c < 3; ++c) {
        mn[c] = 1e300;
        mx[c] = -1e300;
    }
    for (std::int64_t i = 0; i < d.voxel_count(); ++i)
        for (int c = 0; c < 3; ++c) {
            mn[c] = std::min(mn[c], u.data[std::size_t(3 * i + c)]);
            mx[c] = std::max(mx[c], u.data[std::size_t(3 * i + c)]);
        }
    const DisplacementField f = filter_field(u, GaussianSpec::adaptive(map));
    for (std::int64_t i = 0; i < d.voxel_count(); ++i)
        for (int c = 0; c < 3; ++c) {
            REQUIRE(f.data[std::size_t(3 * i + c)] >= mn[c] - 1e-12);
            REQUIRE(f.data[std::size_t(3 * i + c)] <= mx[c] + 1e-12);
        }
}

TEST_CASE("filter_cost with sigma 0 is the identity", "[filtering]") {
    const Dims d{5, 5, 5};
    CostVolume c;
    c.dims = d;
    c.k = 1;
    const ScalarVolume s = ts::random_scalar({5 * 27, 5, 5}, 90);
    c.costs.assign(s.data.begin(), s.data.begin() + d.voxel_count() * 27);
    const CostVolume f = filter_cost(c, GaussianSpec::isotropic(0.0));
    REQUIRE(f.costs == c.costs);
}

TEST_CASE("filter_cost leaves spatially constant cost volumes unchanged", "[filtering]") {
    const Dims d{6, 6, 6};
    CostVolume c;
    c.dims = d;
    c.k = 1;
    c.costs.resize(std::size_t(d.voxel_count()) * 27);
    std::mt19937 rng(91);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double pattern[27];
    for (double& p : pattern) p = uni(rng);
    for (std::int64_t i = 0; i < d.voxel_count(); ++i)
        for (int o = 0; o < 27; ++o) c.costs[std::size_t(i * 27 + o)] = pattern[o];
    const CostVolume f = filter_cost(c, GaussianSpec::isotropic(1.2));
    REQUIRE(ts::max_abs_diff(f.costs, c.costs) < 1e-12);
}

TEST_CASE("filter_cost matches the dense per-channel oracle at constant sigma", "[filtering]") {
    const Dims d{6, 5, 6};
    CostVolume c;
    c.dims = d;
    c.k = 1;
    c.costs.resize(std::size_t(d.voxel_count()) * 27);
    std::mt19937 rng(92);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double& v : c.costs) v = uni(rng);
    const SigmaMap map = uniform_sigma(d, 1.1);
    const CostVolume got = filter_cost(c, GaussianSpec::adaptive(map));
    const auto want = oracles::gauss3d_dense(c.costs, d, 27, 1.1);
    REQUIRE(ts::max_abs_diff(got.costs, want) < 1e-5);
}

TEST_CASE("filter dimension mismatches are rejected", "[filtering]") {
    const DisplacementField u = ts::random_field({5, 5, 5}, 1.0, 93);
    const SigmaMap map = uniform_sigma({5, 5, 4}, 1.0);
    REQUIRE_THROWS_AS(filter_field(u, GaussianSpec::adaptive(map)), std::invalid_argument);
}
