#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "mflab/errors.hpp"
#include "mflab/mass_algebra.hpp"
#include "mflab/torus_field.hpp"
#include "quad.hpp"

using namespace mflab;

namespace {

// band-limited random mean-zero field
TorusField random_smooth(TorusGrid g, std::mt19937_64& rng, int kmax = 4, double amp = 1.0) {
    std::normal_distribution<double> nd(0.0, 1.0);
    TorusField u(g);
    for (int kx = 0; kx <= kmax; ++kx) {
        for (int ky = -kmax; ky <= kmax; ++ky) {
            if (kx == 0 && ky <= 0) continue;
            const double c = amp * nd(rng) / (1.0 + kx * kx + ky * ky);
            const double s = amp * nd(rng) / (1.0 + kx * kx + ky * ky);
            u += TorusField::sample(g, [=](TorusPoint p) {
                const double th = 2.0 * pi * (kx * p.x + ky * p.y);
                return c * std::cos(th) + s * std::sin(th);
            });
        }
    }
    return u;
}

}  // namespace

TEST_CASE("grid and distance basics") {
    CHECK_THROWS_AS(TorusGrid(8), ValidationError);
    CHECK_THROWS_AS(TorusGrid(48), ValidationError);
    const TorusGrid g(16);
    CHECK(g.cell_area() * static_cast<double>(g.size()) == 1.0);
    CHECK(torus_distance({0.05, 0.5}, {0.95, 0.5}) == doctest::Approx(0.1));
    CHECK(torus_distance({0.0, 0.0}, {0.5, 0.5}) == doctest::Approx(std::sqrt(0.5)));
    CHECK(wrap_unit(-0.25) == doctest::Approx(0.75));
    CHECK(wrap_unit(1.0) == 0.0);
}

TEST_CASE("mean zero projection") {
    std::mt19937_64 rng(1);
    const TorusGrid g(32);
    TorusField u = random_smooth(g, rng);
    for (auto& x : u.values()) x += 3.7;
    CHECK(std::abs(u.mean_zero().integral()) < 1e-12);
}

TEST_CASE("poisson solve") {
    const TorusGrid g(64);
    const TorusField f = TorusField::sample(g, [](TorusPoint p) { return 4 * pi * pi * std::cos(2 * pi * p.x); });
    const TorusField u = poisson_solve(f);
    const TorusField ref = TorusField::sample(g, [](TorusPoint p) { return std::cos(2 * pi * p.x); });
    CHECK((u - ref).sup_norm() < 1e-10);
    CHECK(poisson_solve(TorusField(g)).sup_norm() == 0.0);
    CHECK_THROWS_AS(poisson_solve(TorusField::constant(g, 1.0)), NonZeroMeanError);

    SUBCASE("round trip on random fields") {
        std::mt19937_64 rng(2);
        std::normal_distribution<double> nd;
        for (int t = 0; t < 5; ++t) {
            TorusField r(g);
            for (auto& x : r.values()) x = nd(rng);
            r = r.mean_zero();
            const TorusField back = -1.0 * laplacian(poisson_solve(r));
            CHECK((back - r).sup_norm() < 1e-8);
            const TorusField smooth = random_smooth(g, rng, 8);
            CHECK((poisson_solve(-1.0 * laplacian(smooth)) - smooth.mean_zero()).sup_norm() < 1e-8);
        }
    }
}

TEST_CASE("dirichlet energy") {
    const TorusGrid g(32);
    const TorusField s = TorusField::sample(g, [](TorusPoint p) { return std::sin(2 * pi * p.x); });
    CHECK(dirichlet_energy(s) == doctest::Approx(pi * pi).epsilon(1e-13));
    CHECK(dirichlet_energy(TorusField(g)) == 0.0);
    const TorusField two = TorusField::sample(g, [](TorusPoint p) { return std::sin(2 * pi * p.x) + std::cos(4 * pi * p.y); });
    CHECK(dirichlet_energy(two) == doctest::Approx(5 * pi * pi).epsilon(1e-13));

    SUBCASE("agrees with a quad-precision direct DFT, Nyquist included") {
        std::mt19937_64 rng(4);
        std::normal_distribution<double> nd;
        const TorusGrid small(16);
        for (int t = 0; t < 3; ++t) {
            TorusField u(small);
            for (auto& x : u.values()) x = nd(rng);
            std::vector<double> v(u.values().begin(), u.values().end());
            CHECK(dirichlet_energy(u) == doctest::Approx(oracle::dirichlet_dft(v, 16)).epsilon(1e-12));
        }
    }
    SUBCASE("quadratic scaling and gradient consistency") {
        std::mt19937_64 rng(5);
        const TorusField u = random_smooth(g, rng);
        CHECK(dirichlet_energy(3.0 * u) == doctest::Approx(9.0 * dirichlet_energy(u)).epsilon(1e-13));
        const auto gr = gradient(u);
        CHECK(0.5 * (inner(gr[0], gr[0]) + inner(gr[1], gr[1])) == doctest::Approx(dirichlet_energy(u)).epsilon(1e-12));
        CHECK(-inner(u, laplacian(u)) / 2 == doctest::Approx(dirichlet_energy(u)).epsilon(1e-12));
    }
}

TEST_CASE("log_mean_exp") {
    const TorusGrid g(16);
    const TorusField one = TorusField::constant(g, 1.0);
    CHECK(log_mean_exp(TorusField(g), one, 1.0) == 0.0);

    const TorusField big = TorusField::sample(g, [](TorusPoint p) { return 10 * std::sin(2 * pi * p.x) * std::cos(2 * pi * p.y); });
    std::vector<double> u(big.values().begin(), big.values().end());
    std::vector<double> h(u.size(), 1.0);
    for (double s : {1.0, 0.3}) {
        const double lib = log_mean_exp(big, one, s);
        CHECK(std::isfinite(lib));
        CHECK(lib == doctest::Approx(oracle::log_mean_exp_q(u, h, s)).epsilon(1e-14));
        CHECK(lib >= 0.0);
    }
    const TorusField huge = 800.0 * big;
    CHECK(std::isfinite(log_mean_exp(huge, one, 1.0)));
    CHECK_THROWS_AS(log_mean_exp(big, TorusField(g), 1.0), ValidationError);
    CHECK_THROWS_AS(log_mean_exp(big, one, 0.0), ValidationError);
    CHECK_THROWS_AS(log_mean_exp(big, one, 1.5), ValidationError);
}

TEST_CASE("prolongation is exact for band-limited fields") {
    std::mt19937_64 rng(6);
    const TorusGrid g(32);
    const TorusField u = random_smooth(g, rng, 6);
    const TorusField f = prolong(u, 64);
    for (int iy = 0; iy < 32; ++iy) {
        for (int ix = 0; ix < 32; ++ix) CHECK(f(2 * ix, 2 * iy) == doctest::Approx(u(ix, iy)).epsilon(1e-12));
    }
    CHECK(dirichlet_energy(f) == doctest::Approx(dirichlet_energy(u)).epsilon(1e-12));
    // a pure Nyquist cosine keeps its grid values
    const TorusField nyq = TorusField::sample(g, [](TorusPoint p) { return std::cos(2 * pi * 16 * p.x); });
    const TorusField fn = prolong(nyq, 64);
    CHECK(fn(0, 0) == doctest::Approx(1.0));
    CHECK(fn(2, 0) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(prolong(u, 48), ValidationError);
}

TEST_CASE("binary and csv round trip") {
    std::mt19937_64 rng(8);
    const TorusField u = random_smooth(TorusGrid(16), rng);
    const auto dir = std::filesystem::temp_directory_path() / "mflab_unit_io";
    std::filesystem::create_directories(dir);
    write_field_binary(dir / "u.bin", u);
    const TorusField back = read_field_binary(dir / "u.bin");
    CHECK(back.n() == 16);
    CHECK((back - u).sup_norm() == 0.0);
    write_field_csv(dir / "u.csv", u);
    CHECK(std::filesystem::file_size(dir / "u.csv") > 0);
    std::filesystem::remove_all(dir);
}
