#include <doctest.h>

#include <cmath>
#include <random>

#include "dense_lp.hpp"
#include "mflab/errors.hpp"
#include "mflab/mass_algebra.hpp"
#include "mflab/measures.hpp"
#include "mflab/transport.hpp"

using namespace mflab;

namespace {

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, double zero_prob = 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& x : w) {
        x = u(rng) < zero_prob ? 0.0 : u(rng);
        s += x;
    }
    if (s == 0.0) {
        w[0] = 1.0;
        s = 1.0;
    }
    for (auto& x : w) x /= s;
    return w;
}

std::vector<WeightedPoint> random_measure(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto w = random_simplex(rng, n);
    std::vector<WeightedPoint> out;
    for (double x : w) out.push_back({{u(rng), u(rng)}, x});
    return out;
}

}  // namespace

TEST_CASE("transport simplex matches the dense LP oracle") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 40; ++t) {
        const std::size_t S = 2 + rng() % 7;
        const std::size_t D = 2 + rng() % 7;
        const auto supply = random_simplex(rng, S, 0.2);
        const auto demand = random_simplex(rng, D, 0.2);
        std::vector<double> cost(S * D);
        // integer costs make degenerate ties common
        for (auto& c : cost) c = t % 2 ? u(rng) : std::floor(4 * u(rng));
        const TransportPlan plan = solve_transport(supply, demand, cost);
        const double ref = static_cast<double>(oracle::transport_lp(supply, demand, cost));
        CHECK(plan.cost == doctest::Approx(ref).epsilon(1e-10));

        std::vector<double> out(S, 0.0);
        std::vector<double> in(D, 0.0);
        for (const auto& f : plan.flows) {
            CHECK(f.amount >= 0.0);
            out[f.source] += f.amount;
            in[f.sink] += f.amount;
        }
        for (std::size_t i = 0; i < S; ++i) CHECK(out[i] == doctest::Approx(supply[i]).epsilon(1e-12));
        for (std::size_t j = 0; j < D; ++j) CHECK(in[j] == doctest::Approx(demand[j]).epsilon(1e-12));
    }
}

TEST_CASE("transport validation") {
    const std::vector<double> s{0.5, 0.5};
    const std::vector<double> d{1.0};
    CHECK_THROWS_AS(solve_transport(s, std::vector<double>{0.7}, std::vector<double>{1.0, 1.0}), MassMismatchError);
    CHECK_THROWS_AS(solve_transport(s, d, std::vector<double>{1.0}), ValidationError);
    CHECK_THROWS_AS(solve_transport(std::vector<double>{-0.5, 1.5}, d, std::vector<double>{1.0, 1.0}), ValidationError);
}

TEST_CASE("wasserstein1 is a metric") {
    std::mt19937_64 rng(22);
    for (int t = 0; t < 20; ++t) {
        const auto a = random_measure(rng, 6);
        const auto b = random_measure(rng, 5);
        const auto c = random_measure(rng, 7);
        const double ab = wasserstein1(a, b);
        CHECK(ab == doctest::Approx(wasserstein1(b, a)).epsilon(1e-12));
        CHECK(ab <= wasserstein1(a, c) + wasserstein1(c, b) + 1e-8);
        CHECK(ab <= std::sqrt(0.5) + 1e-12);
        CHECK(wasserstein1(a, a) == doctest::Approx(0.0));
    }
}

TEST_CASE("kr distance examples") {
    const TorusGrid g(16);
    SUBCASE("two unit atoms") {
        const std::vector<WeightedPoint> a{{{0.1, 0.3}, 1.0}};
        const std::vector<WeightedPoint> b{{{0.35, 0.3}, 1.0}};
        CHECK(wasserstein1(a, b) == doctest::Approx(0.25));
    }
    SUBCASE("one-cell density against its own atom") {
        std::vector<double> w(g.size(), 0.0);
        w[g.index(5, 9)] = 1.0;
        const DensityMeasure mu(g, w);
        const Barycenter nu({{g.point(5, 9), 1.0}});
        const auto kr = kr_distance(mu, nu, 8);
        CHECK(kr.distance <= std::sqrt(2.0) / 8.0);
        CHECK(kr.distance <= kr.downsample_bound + 1e-15);
    }
    SUBCASE("uniform density against a centered atom equals the LP") {
        const DensityMeasure mu(g, std::vector<double>(g.size(), 1.0 / g.size()));
        const Barycenter nu({{{0.5, 0.5}, 1.0}});
        const auto coarse = downsample(mu, 8);
        REQUIRE(coarse.size() == 64);
        std::vector<double> supply, cost;
        for (const auto& c : coarse) {
            supply.push_back(c.weight);
            cost.push_back(torus_distance(c.point, {0.5, 0.5}));
        }
        const double ref = static_cast<double>(oracle::transport_lp(supply, {1.0}, cost));
        CHECK(std::abs(kr_distance(mu, nu, 8).distance - ref) < 1e-6);
    }
}

TEST_CASE("downsample keeps mass at centroids") {
    const TorusGrid g(32);
    std::mt19937_64 rng(23);
    const DensityMeasure mu(g, random_simplex(rng, g.size()));
    const auto c = downsample(mu, 8);
    double total = 0.0;
    for (const auto& p : c) total += p.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(downsample_error_bound(g, 8) == doctest::Approx(std::sqrt(2.0) * 3.0 / 64.0));
    CHECK(downsample(mu, 64).size() == g.size());
}

TEST_CASE("distance to barycenters") {
    const TorusGrid g(64);
    const TorusPoint c1{0.25 + 1.0 / 64, 0.25 + 1.0 / 64};
    const TorusPoint c2{0.75 + 1.0 / 64, 0.5 + 1.0 / 64};
    const double s2 = 0.01 * 0.01;
    const TorusField f = TorusField::sample(g, [&](TorusPoint p) {
        const double d1 = torus_distance(p, c1);
        const double d2 = torus_distance(p, c2);
        return std::exp(-d1 * d1 / (2 * s2)) + std::exp(-d2 * d2 / (2 * s2));
    });
    const DensityMeasure mu = DensityMeasure::from_field(f);

    const auto fit2 = dist_to_barycenters(mu, 2);
    CHECK(fit2.distance < 0.02);
    REQUIRE(fit2.barycenter.k() == 2);
    for (const auto& at : fit2.barycenter.atoms()) {
        const double d = std::min(torus_distance(at.point, c1), torus_distance(at.point, c2));
        CHECK(d <= std::sqrt(2.0) / 32.0);
    }
    const double sep = torus_distance(c1, c2);
    const auto fit1 = dist_to_barycenters(mu, 1);
    CHECK(fit1.distance == doctest::Approx(0.5 * sep).epsilon(0.2));

    const DensityMeasure uniform(g, std::vector<double>(g.size(), 1.0 / g.size()));
    CHECK(dist_to_barycenters(uniform, 1).distance > 0.2);
    CHECK_THROWS_AS(dist_to_barycenters(uniform, 0), ValidationError);
    CHECK_THROWS_AS(dist_to_barycenters(uniform, 5), ValidationError);
}

TEST_CASE("barycenter validation") {
    CHECK_THROWS_AS(Barycenter({{{0.1, 0.1}, 0.5}}), ValidationError);
    CHECK_THROWS_AS(Barycenter({{{0.1, 0.1}, 1.5}, {{0.2, 0.2}, -0.5}}), ValidationError);
    const Barycenter b({{{1.25, -0.5}, 1.0}});
    CHECK(b.atoms()[0].point.x == doctest::Approx(0.25));
    CHECK(b.atoms()[0].point.y == doctest::Approx(0.5));
}
