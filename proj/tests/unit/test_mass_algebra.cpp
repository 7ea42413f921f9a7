#include <doctest.h>

#include <cmath>
#include <random>

#include "mflab/errors.hpp"
#include "mflab/mass_algebra.hpp"

using namespace mflab;

TEST_CASE("intensity rejects values outside (0, 1)") {
    CHECK_THROWS_AS(Intensity(0.0), ValidationError);
    CHECK_THROWS_AS(Intensity(1.0), ValidationError);
    CHECK_THROWS_AS(Intensity(-0.2), ValidationError);
    CHECK_THROWS_AS(Intensity(std::nan("")), ValidationError);
    CHECK(Intensity(0.3).value() == 0.3);
}

TEST_CASE("pohozaev residual examples") {
    CHECK(pohozaev_residual({4, 0}, Intensity(0.3)) == 0.0);
    CHECK(pohozaev_residual({0, 64}, Intensity(0.25)) == 0.0);
    CHECK(pohozaev_residual({1, 1}, Intensity(0.3)) == doctest::Approx(6.31).epsilon(1e-14));
}

TEST_CASE("gamma_m roots") {
    SUBCASE("m = 1, a = 1/4") {
        const auto g = solve_gamma_m(1, Intensity(0.25));
        REQUIRE(g.roots.size() == 2);
        CHECK(g.roots[0] == 0.0);
        CHECK(g.roots[1] == doctest::Approx(32.0).epsilon(1e-15));
    }
    SUBCASE("m = 2, a = 1/4 has negative discriminant") {
        CHECK(discriminant_gamma_m(2, Intensity(0.25)) == doctest::Approx(-8.0));
        CHECK(solve_gamma_m(2, Intensity(0.25)).empty());
    }
    SUBCASE("m = 2, a = 0.1") {
        // 0.01 x^2 - 2.4 x + 32 = 0
        const double r0 = (2.4 - std::sqrt(2.4 * 2.4 - 4 * 0.01 * 32)) / 0.02;
        const double r1 = (2.4 + std::sqrt(2.4 * 2.4 - 4 * 0.01 * 32)) / 0.02;
        const auto g = solve_gamma_m(2, Intensity(0.1));
        REQUIRE(g.roots.size() == 2);
        CHECK(g.roots[0] == doctest::Approx(r0).epsilon(1e-12));
        CHECK(g.roots[1] == doctest::Approx(r1).epsilon(1e-12));
        CHECK(g.roots[0] == doctest::Approx(14.169947557416).epsilon(1e-12));
    }
    SUBCASE("double root at vanishing discriminant") {
        // 16 + 64 m a (a - 1) = 0 for m = 1 at a = 1/2
        const auto g = solve_gamma_m(1, Intensity(0.5));
        CHECK(g.double_root);
        REQUIRE(g.roots.size() == 1);
        CHECK(g.roots[0] == doctest::Approx(0.0));
    }
    SUBCASE("emptiness follows the discriminant") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> ua(1e-3, 1.0 - 1e-3);
        for (int t = 0; t < 500; ++t) {
            const Intensity a(ua(rng));
            for (int m = 1; m <= 12; ++m) {
                const bool neg = discriminant_gamma_m(m, a) < 0.0;
                CHECK(solve_gamma_m(m, a).empty() == neg);
                CHECK(neg == (m > 1.0 / (4.0 * a * (1.0 - a))));
            }
        }
    }
    CHECK_THROWS_AS(solve_gamma_m(0, Intensity(0.3)), ValidationError);
}

TEST_CASE("classification examples") {
    SUBCASE("pure first component") {
        const auto t = classify_local_mass({4, 0}, Intensity(0.4), 1e-9);
        CHECK(t.kind == BlowupKind::Pure1);
    }
    SUBCASE("pure second component") {
        const auto t = classify_local_mass({0, 1.0 / (0.3 * 0.3) * 4.0}, Intensity(0.3), 1e-9);
        CHECK(t.kind == BlowupKind::Pure2);
    }
    SUBCASE("full limit") {
        // positive root of 0.16 b^2 - 2.4 b - 4 = 0
        const double beta = (2.4 + std::sqrt(2.4 * 2.4 + 4 * 0.16 * 4)) / 0.32;
        const auto t = classify_local_mass({2, beta}, Intensity(0.4), 1e-6);
        CHECK(t.kind == BlowupKind::FullLimit);
        CHECK(t.pair.sigma1 == 2.0);
        CHECK(t.pair.sigma2 == doctest::Approx(beta).epsilon(1e-13));
        CHECK(2 + 0.4 * beta > 4.0);
        CHECK(beta < 25.0);
        CHECK(classify_local_mass({2, 16.513}, Intensity(0.4), 1e-2).kind == BlowupKind::FullLimit);
    }
    SUBCASE("multi bubble") {
        const double g2 = solve_gamma_m(2, Intensity(0.1)).roots[0];
        const auto t = classify_local_mass({8, g2}, Intensity(0.1), 1e-6);
        CHECK(t.kind == BlowupKind::MultiBubble);
        CHECK(t.m == 2);
        CHECK(t.pair.sigma2 == doctest::Approx(14.17).epsilon(1e-3));
    }
    SUBCASE("threshold wins the tie with full limit") {
        const Intensity a(0.25);
        const auto t = classify_local_mass({4, 32}, a, 1e-6);
        CHECK(t.kind == BlowupKind::Threshold);
    }
    SUBCASE("off-curve pairs are not admissible") {
        CHECK(classify_local_mass({1, 1}, Intensity(0.3), 1e-6).kind == BlowupKind::NotAdmissible);
        CHECK(classify_local_mass({5, 0}, Intensity(0.3), 1e-6).kind == BlowupKind::NotAdmissible);
    }
    CHECK_THROWS_AS(classify_local_mass({-1, 0}, Intensity(0.3), 1e-6), ValidationError);
    CHECK_THROWS_AS(classify_local_mass({1, 0}, Intensity(0.3), 0.0), ValidationError);
}

TEST_CASE("classified pairs satisfy the mass relation") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ua(0.02, 0.98);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 300; ++t) {
        const Intensity a(ua(rng));
        const double alpha = 4.0 * unit(rng);
        const MassPair candidates[] = {{4, 0}, {0, 4 / (a * a)}, {alpha, pohozaev_partner(alpha, a)}};
        for (const auto& mp : candidates) {
            const auto type = classify_local_mass(mp, a, 1e-9);
            if (type.kind == BlowupKind::NotAdmissible) continue;
            CHECK(std::abs(pohozaev_residual(type.pair, a)) < 1e-9);
        }
    }
}

TEST_CASE("thresholds") {
    CHECK(min_mass_rho2(Intensity(0.25)) == doctest::Approx(64 * pi));
    CHECK(min_mass_rho2(Intensity(0.5)) == doctest::Approx(0.0));
    CHECK(min_mass_rho2(Intensity(0.1)) == doctest::Approx(640 * pi));
    auto check_interval = [](double a, double lo, double hi) {
        const auto [l, h] = admissible_eta_interval(Intensity(a));
        CHECK(l == doctest::Approx(lo));
        CHECK(h == doctest::Approx(hi));
    };
    check_interval(0.5, 4, 8);
    check_interval(0.4, 6, 10);
    check_interval(0.8, 4, 5);
}

TEST_CASE("m = 1 root is the threshold mass") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(0.01, 0.49);
    for (int t = 0; t < 200; ++t) {
        const Intensity a(ua(rng));
        const auto g = solve_gamma_m(1, a);
        REQUIRE(g.roots.size() == 2);
        const double expected = (4.0 - 8.0 * a) / (a * a);
        CHECK(std::abs(g.roots[1] - expected) <= 1e-12 * expected);
        CHECK(to_absolute_mass(g.roots[1]) ==
              doctest::Approx(min_mass_rho2(a)).epsilon(1e-12));
    }
}

TEST_CASE("sharp threshold") {
    CHECK(sharp_threshold(AtomicIntensity({{1.0, 1.0}})) == doctest::Approx(8 * pi));
    CHECK(sharp_threshold(AtomicIntensity::two_atoms(0.5, 0.25)) == doctest::Approx(16 * pi));
    CHECK(sharp_threshold(AtomicIntensity::two_atoms(0.1, 0.4)) / (8 * pi) ==
          doctest::Approx(4.725897920604915).epsilon(1e-12));

    SUBCASE("opposite signs never share a subset") {
        // {1: 1/2, -1: 1/2}: each side alone gives 1/2 / (1/4) = 2
        CHECK(sharp_threshold(AtomicIntensity({{1.0, 0.5}, {-1.0, 0.5}})) == doctest::Approx(16 * pi));
    }
    SUBCASE("matches the two-atom closed form") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.01, 0.99);
        for (int t = 0; t < 100; ++t) {
            const double tau = u(rng);
            const double a = u(rng);
            const double lib = sharp_threshold(AtomicIntensity::two_atoms(tau, a));
            CHECK(std::abs(lib - sharp_threshold_two_atoms(tau, a)) <= 1e-12 * lib);
        }
    }
    CHECK_THROWS_AS(sharp_threshold(AtomicIntensity({{0.0, 1.0}})), ValidationError);
    CHECK_THROWS_AS(AtomicIntensity({{1.0, 0.5}, {0.5, 0.4}}), ValidationError);
    CHECK_THROWS_AS(AtomicIntensity({{1.0, 0.5}, {1.0, 0.5}}), ValidationError);
    CHECK_THROWS_AS(AtomicIntensity({{1.5, 1.0}}), ValidationError);
}

TEST_CASE("coercive region") {
    CHECK(coercive_region({8 * pi, 0}, Intensity(0.3)));
    CHECK(coercive_region({8 * pi, min_mass_rho2(Intensity(0.25))}, Intensity(0.25)));
    CHECK_FALSE(coercive_region({9 * pi, 0}, Intensity(0.3)));

    SUBCASE("monotone under decreasing rho") {
        std::mt19937_64 rng(19);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int t = 0; t < 500; ++t) {
            const Intensity a(0.05 + 0.9 * u(rng));
            const RhoPair rho{10 * pi * u(rng), 10 * pi / (a * a) * u(rng)};
            if (!coercive_region(rho, a)) continue;
            CHECK(coercive_region({rho.rho1 * u(rng), rho.rho2}, a));
            CHECK(coercive_region({rho.rho1, rho.rho2 * u(rng)}, a));
        }
    }
}
