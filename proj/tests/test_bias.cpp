#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ddb/bias.hpp"
#include "ddb/errors.hpp"

using namespace ddb;

namespace {

ActivationMatrix matrix(std::int64_t rows, std::int64_t cols, std::vector<double> values) {
    ActivationMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.values = std::move(values);
    return m;
}

CorrelationVector corr(std::vector<double> rho, BiasFactor f = BiasFactor::shape) {
    CorrelationVector v;
    v.rho = std::move(rho);
    v.factor = f;
    v.n_pairs = 8;
    return v;
}

}  // namespace

TEST_CASE("neuron_pair_correlation: identical and negated sides") {
    const auto a = matrix(3, 2, {1, 4, 2, 5, 3, 9});
    auto rho = neuron_pair_correlation(a, a);
    REQUIRE(rho.rho.size() == 2);
    CHECK(rho.rho[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho.rho[1] == doctest::Approx(1.0).epsilon(1e-12));

    auto neg = a;
    for (auto& v : neg.values) v = -v;
    rho = neuron_pair_correlation(a, neg);
    CHECK(rho.rho[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(rho.rho[1] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("neuron_pair_correlation: hand-verified 0.5 case and degenerate column") {
    // one neuron, pairs a=(1,2,3), b=(1,3,2)
    const auto rho = neuron_pair_correlation(matrix(3, 1, {1, 2, 3}), matrix(3, 1, {1, 3, 2}));
    CHECK(rho.rho[0] == doctest::Approx(0.5).epsilon(1e-12));

    const auto z = neuron_pair_correlation(matrix(3, 1, {7, 7, 7}), matrix(3, 1, {1, 3, 2}));
    CHECK(z.rho[0] == 0.0);
}

TEST_CASE("neuron_pair_correlation: shape and size errors") {
    CHECK_THROWS_AS(neuron_pair_correlation(matrix(3, 1, {1, 2, 3}), matrix(3, 2, {1, 2, 3, 4, 5, 6})),
                    ShapeError);
    CHECK_THROWS_AS(neuron_pair_correlation(matrix(2, 1, {1, 2}), matrix(2, 1, {1, 2})),
                    InsufficientDataError);
}

TEST_CASE("neuron_pair_correlation is invariant to pair order") {
    std::mt19937_64 rng(11);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const std::int64_t n = 12, z = 6;
    std::vector<double> va(n * z), vb(n * z);
    for (auto& v : va) v = unit();
    for (auto& v : vb) v = unit();
    const auto base = neuron_pair_correlation(matrix(n, z, va), matrix(n, z, vb));

    std::vector<std::int64_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pa(n * z), pb(n * z);
    for (std::int64_t r = 0; r < n; ++r) {
        for (std::int64_t c = 0; c < z; ++c) {
            pa[r * z + c] = va[perm[r] * z + c];
            pb[r * z + c] = vb[perm[r] * z + c];
        }
    }
    const auto permuted = neuron_pair_correlation(matrix(n, z, pa), matrix(n, z, pb));
    for (std::int64_t c = 0; c < z; ++c) {
        CHECK(std::abs(base.rho[c] - permuted.rho[c]) < 1e-12);
    }
}

TEST_CASE("bias_fractions: null case softmax(0,0,1)") {
    const auto est = bias_fractions(corr({0, 0, 0, 0}), corr({0, 0, 0, 0}, BiasFactor::texture));
    CHECK(std::abs(est.shape_frac - 0.2119) < 1e-4);
    CHECK(std::abs(est.texture_frac - 0.2119) < 1e-4);
    CHECK(std::abs(est.residual_frac - 0.5761) < 1e-4);
}

TEST_CASE("bias_fractions: equal rho vectors give equal fractions") {
    const std::vector<double> rho = {0.3, -0.2, 0.9, 0.1};
    const auto est = bias_fractions(corr(rho), corr(rho, BiasFactor::texture));
    CHECK(est.shape_frac == est.texture_frac);
}

TEST_CASE("bias_fractions: saturated shape case") {
    const auto est = bias_fractions(corr({1, 1, 1}), corr({0, 0, 0}, BiasFactor::texture));
    CHECK(est.shape_frac == est.residual_frac);  // scores are (1, 0, 1)
    CHECK(est.shape_frac > est.texture_frac);
}

TEST_CASE("bias_fractions: swap symmetry, all modes") {
    std::mt19937_64 rng(3);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (auto mode : {BaselineMode::mean_rho, BaselineMode::raw_paper, BaselineMode::reference_impl}) {
        std::vector<double> s(16), t(16);
        for (auto& v : s) v = 2.0 * unit() - 1.0;
        for (auto& v : t) v = 2.0 * unit() - 1.0;
        const auto ab = bias_fractions(corr(s), corr(t, BiasFactor::texture), mode);
        const auto ba = bias_fractions(corr(t), corr(s, BiasFactor::texture), mode);
        CHECK(ab.shape_frac == ba.texture_frac);
        CHECK(ab.texture_frac == ba.shape_frac);
        CHECK(ab.residual_frac == ba.residual_frac);
    }
}

TEST_CASE("bias_fractions: monotone in any single rho entry") {
    std::mt19937_64 rng(17);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t z = 1 + rng() % 32;
        std::vector<double> s(z), t(z);
        for (auto& v : s) v = 1.8 * unit() - 0.9;
        for (auto& v : t) v = 1.8 * unit() - 0.9;
        const auto base = bias_fractions(corr(s), corr(t, BiasFactor::texture));
        auto bumped = s;
        bumped[rng() % z] += 0.05;
        const auto est = bias_fractions(corr(bumped), corr(t, BiasFactor::texture));
        CHECK(est.shape_frac > base.shape_frac);
        CHECK(est.texture_frac < base.texture_frac);
        CHECK(est.residual_frac < base.residual_frac);
    }
}

TEST_CASE("bias_fractions: sum to 1 within 1e-9 across sizes and modes") {
    std::mt19937_64 rng(29);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (std::size_t z : {std::size_t{1}, std::size_t{8}, std::size_t{512}}) {
        for (int trial = 0; trial < 334; ++trial) {
            std::vector<double> s(z), t(z);
            for (auto& v : s) v = 2.0 * unit() - 1.0;
            for (auto& v : t) v = 2.0 * unit() - 1.0;
            for (auto mode :
                 {BaselineMode::mean_rho, BaselineMode::raw_paper, BaselineMode::reference_impl}) {
                const auto est = bias_fractions(corr(s), corr(t, BiasFactor::texture), mode);
                CHECK(std::abs(est.shape_frac + est.texture_frac + est.residual_frac - 1.0) < 1e-9);
                CHECK(est.shape_frac > 0.0);
                CHECK(est.texture_frac > 0.0);
                CHECK(est.residual_frac > 0.0);
            }
        }
    }
}

TEST_CASE("bias_fractions: length mismatch rejected; mode names round-trip") {
    CHECK_THROWS_AS(bias_fractions(corr({0.1, 0.2}), corr({0.1}, BiasFactor::texture)), ShapeError);
    for (auto mode : {BaselineMode::mean_rho, BaselineMode::raw_paper, BaselineMode::reference_impl}) {
        CHECK(baseline_mode_from_string(to_string(mode)) == mode);
    }
    CHECK_THROWS_AS(baseline_mode_from_string("bogus"), ValidationError);
}
