#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "gtab/core.hpp"
#include "gtab/errors.hpp"
#include "gtab/tables.hpp"
#include "oracle.hpp"

using namespace gtab;

TEST_CASE("one-step loss matches closed form and a smoothed-prior quadrature") {
    const auto prior = SymmetricPrior::two_point(1.6);
    const double g = one_step_loss(prior, Arm::One, {0.0, 0.5, 0.5});
    CHECK(g == doctest::Approx(1.6 * std::exp(-1.28)).epsilon(1e-14));
    CHECK(g == doctest::Approx(0.44486).epsilon(1e-5));

    // 2 * int_0^inf w exp(-2 u w - 2 w^2 tau) rho_s(w) dw with rho_s a narrow
    // Gaussian mixture around +-1.6; converges to the atomic value as s -> 0.
    const double s = 1e-3;
    const double tau = 0.25;
    const double smoothed = oracle::simpson(
        [&](double w) {
            const double rho = 0.5 * oracle::normal_pdf(w - 1.6, s * s) +
                               0.5 * oracle::normal_pdf(w + 1.6, s * s);
            return 2.0 * w * std::exp(-2.0 * w * w * tau) * rho;
        },
        1.6 - 12 * s, 1.6 + 12 * s, 2000);
    CHECK(smoothed == doctest::Approx(g).epsilon(1e-5));
}

TEST_CASE("one-step loss vanishes for a tiny prior gap") {
    const auto prior = SymmetricPrior::two_point(1e-9);
    CHECK(one_step_loss(prior, Arm::One, {0.3, 0.2, 0.4}) < 1e-8);
}

TEST_CASE("one-step loss arm-swap symmetry") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-3.0, 3.0), T(0.01, 0.99), D(0.05, 4.0);
    for (int i = 0; i < 500; ++i) {
        const auto prior = SymmetricPrior({{D(rng), 0.3}, {D(rng), 0.7}});
        const double u = U(rng), t1 = T(rng), t2 = T(rng);
        CHECK(one_step_loss(prior, Arm::One, {u, t1, t2}) ==
              one_step_loss(prior, Arm::Two, {-u, t2, t1}));
    }
}

TEST_CASE("one-step loss decreases as the information term grows") {
    const auto prior = SymmetricPrior::two_point(1.2);
    for (double u : {-1.0, 0.0, 0.7}) {
        double prev = one_step_loss(prior, Arm::One, {u, 0.05, 0.05});
        for (double t2 = 0.1; t2 < 0.9; t2 += 0.05) {
            const double g = one_step_loss(prior, Arm::One, {u, 0.05, t2});
            CHECK(g < prev);
            prev = g;
        }
    }
}

TEST_CASE("one-step loss rejects t = 0") {
    const auto prior = SymmetricPrior::two_point(1.0);
    CHECK_THROWS_AS(one_step_loss(prior, Arm::One, {0.0, 0.0, 0.0}), ConfigError);
}

TEST_CASE("transition variance example") {
    CHECK(transition_variance(0.02, Arm::One, 0.5, 0.5) ==
          doctest::Approx(0.02 * 0.25 / 1.02).epsilon(1e-14));
    CHECK(transition_variance(0.02, Arm::One, 0.5, 0.5) == doctest::Approx(0.0048077).epsilon(1e-4));
    CHECK(transition_variance(0.02, Arm::Two, 0.3, 0.1) ==
          doctest::Approx(0.02 * 0.09 / (0.4 * 0.42)).epsilon(1e-14));
}

TEST_CASE("gaussian kernel normalization and symmetry") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> V(1e-4, 0.5);
    const UGrid grid(4.0, 0.01);
    for (int i = 0; i < 200; ++i) {
        const auto k = gaussian_kernel(V(rng), grid);
        double sum = 0.0;
        for (int j = -k.reach(); j <= k.reach(); ++j) {
            CHECK(k.weight(j) >= 0.0);
            CHECK(k.weight(j) == k.weight(-j));
            sum += k.weight(j);
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
        CHECK(k.weight(k.reach() + 1) == 0.0);
    }
}

TEST_CASE("gaussian kernel center weight approaches the standard density") {
    const UGrid grid(8.0, 0.001);
    const auto k = gaussian_kernel(1.0, grid);
    CHECK(std::abs(k.weight(0) / grid.du() - 0.398942280) < 1e-6);
}

TEST_CASE("gaussian kernel degenerates to a delta below half a grid step") {
    const UGrid grid(1.0, 0.1);
    const auto k = gaussian_kernel(0.0016, grid);  // sigma = 0.04 < du / 2
    CHECK(k.is_delta());
    CHECK(k.weight(0) == 1.0);
    std::vector<double> in(grid.size()), out(grid.size());
    for (int i = 0; i < grid.size(); ++i) in[i] = std::sin(i);
    k.apply(in, out);
    CHECK(in == out);
    CHECK_FALSE(gaussian_kernel(0.0036, grid).is_delta());
}

TEST_CASE("kernel apply treats the outside as zero") {
    const UGrid grid(2.0, 0.1);
    const auto k = gaussian_kernel(0.04, grid);
    std::vector<double> ones(grid.size(), 1.0), out(grid.size());
    k.apply(ones, out);
    CHECK(out[grid.center()] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.front() < 0.9);
    CHECK(out.front() == doctest::Approx(out.back()).epsilon(1e-15));
}

TEST_CASE("u-grid construction") {
    const UGrid g(4.0, 0.01);
    CHECK(g.size() == 801);
    CHECK(g.point(g.center()) == 0.0);
    CHECK(g.point(0) == doctest::Approx(-4.0));
    CHECK_THROWS_AS(UGrid(2.3, 0.032), ConfigError);
    CHECK_THROWS_AS(UGrid(1.0, 0.0), ConfigError);
    const auto c = UGrid::covering(2.3, 0.032);
    CHECK(c.half_points() == 72);
    CHECK(c.u_max() >= 2.3);
    CHECK(c.u_max() - 2.3 < 0.032);
}

TEST_CASE("nearest index rounds midpoints toward zero and clamps") {
    const UGrid g(1.0, 0.5);
    CHECK(g.nearest_index(0.25) == g.center());
    CHECK(g.nearest_index(-0.25) == g.center());
    CHECK(g.nearest_index(0.26) == g.center() + 1);
    CHECK(g.nearest_index(100.0) == g.size() - 1);
    CHECK(g.nearest_index(-100.0) == 0);
}

TEST_CASE("interpolation is linear and zero outside the domain") {
    const UGrid g(1.0, 0.5);
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(interpolate(v, g, 0.25) == doctest::Approx(3.5));
    CHECK(interpolate(v, g, -1.0) == doctest::Approx(1.0));
    CHECK(interpolate(v, g, 1.2) == 0.0);
}

TEST_CASE("prior validation") {
    CHECK_THROWS_AS(SymmetricPrior({}), ConfigError);
    CHECK_THROWS_AS(SymmetricPrior({{1.0, 0.5}}), ConfigError);
    CHECK_THROWS_AS(SymmetricPrior({{-1.0, 1.0}}), ConfigError);
    CHECK_THROWS_AS(SymmetricPrior({{2.0, 1.0}}, 1.5), ConfigError);
    CHECK_THROWS_AS(SymmetricPrior::two_point(0.0), ConfigError);
    const SymmetricPrior p({{2.0, 0.25}, {1.0, 0.75}});
    CHECK(p.mean_abs() == doctest::Approx(1.25));
    CHECK(p.atoms()[0].w == 1.0);
}

TEST_CASE("dimensional parameters validation") {
    const auto p = DimensionalParams::make(1.0, 0.4, 0.5);
    CHECK(p.mean() == doctest::Approx(0.7));
    CHECK(p.half_gap() == doctest::Approx(0.3));
    CHECK_THROWS_AS(DimensionalParams::make(1.0, -0.2, 0.5), ConfigError);
    CHECK_THROWS_AS(DimensionalParams::make(0.0, 0.0, 0.0), ConfigError);
}

TEST_CASE("invariant mapping examples") {
    const DimensionalState s{12.0, 8.0, 25, 25, 50, 1};
    const auto inv = to_invariant(s);
    CHECK(inv.t1 == 0.5);
    CHECK(inv.t2 == 0.5);
    CHECK(inv.u == doctest::Approx((12.0 * 25 - 8.0 * 25) / 50.0 / std::sqrt(50.0)));
    // sqrt(N) rescaling of a normalized risk of 0.65 at N = 50
    CHECK(0.65 * std::sqrt(50.0) == doctest::Approx(4.596).epsilon(1e-3));

    CHECK_THROWS_AS(to_invariant({0.0, 0.0, 3, 2, 50, 2}), ConfigError);
    CHECK_THROWS_AS(to_invariant({0.0, 0.0, 30, 30, 50, 1}), ConfigError);
    CHECK_THROWS_AS(to_invariant({0.0, 0.0, 1, 1, 51, 2}), ConfigError);
    CHECK(to_invariant({0.0, 0.0, 0, 0, 50, 1}).u == 0.0);
}

TEST_CASE("invariant mapping round trip on lattice states") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> X(-20.0, 20.0);
    const long N = 200, M = 4;
    for (int i = 0; i < 300; ++i) {
        const long k1 = 1 + static_cast<long>(rng() % 25);
        const long k2 = 1 + static_cast<long>(rng() % 24);
        const DimensionalState s{X(rng), X(rng), k1 * M, k2 * M, N, M};
        const auto inv = to_invariant(s);
        const auto back = from_invariant(inv, N, M);
        CHECK(back.n1 == s.n1);
        CHECK(back.n2 == s.n2);
        CHECK(back.U() == doctest::Approx(s.U()).epsilon(1e-12));
        const auto again = to_invariant(back);
        CHECK(again.u == doctest::Approx(inv.u).epsilon(1e-12));
        CHECK(again.t1 == inv.t1);
    }
}

TEST_CASE("lattice indexing is dense and ordered by diagonal") {
    const Lattice lat(7);
    std::vector<int> hit(lat.state_count(), 0);
    std::size_t prev = 0;
    bool first = true;
    for (int K = 2; K <= 7; ++K) {
        for (int k1 = 1; k1 < K; ++k1) {
            const auto idx = lat.index(k1, K - k1);
            if (!first) CHECK(idx == prev + 1);
            prev = idx;
            first = false;
            ++hit[idx];
        }
    }
    for (int h : hit) CHECK(h == 1);
    CHECK(lat.decision_state_count() == 15);
    CHECK_THROWS_AS(Lattice::from_epsilon(0.03), ConfigError);
    CHECK(Lattice::from_epsilon(0.02).packets() == 50);
}

TEST_CASE("strategy table turn-by-turn prefix") {
    StrategyTable t(Lattice(4), UGrid(1.0, 0.5));
    CHECK(t.action(0, 0, 0) == Arm::One);
    CHECK(t.action(1, 0, 0) == Arm::Two);
    t.set(1, 1, 4, Arm::Two);
    CHECK(t.lookup(1, 1, 0.9) == Arm::Two);
    CHECK_THROWS(t.action(2, 2, 0));
}
