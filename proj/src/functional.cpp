#include "mflab/functional.hpp"

#include <algorithm>
#include <cmath>

#include "mflab/bubbles.hpp"
#include "mflab/errors.hpp"
#include "mflab/fitting.hpp"

namespace mflab {

namespace {

void check_positive_weight(const TorusField& h, const char* name) {
    const double lo = h.min();
    const double hi = h.max();
    if (!(lo > 0.0)) throw ValidationError(std::string(name) + " must be strictly positive");
    if (hi / lo > 1e6) throw ValidationError(std::string(name) + " max/min ratio exceeds 1e6");
}

}  // namespace

Weights::Weights(TorusField h1, TorusField h2) : h1_(std::move(h1)), h2_(std::move(h2)) {
    if (!(h1_.grid() == h2_.grid())) throw ValidationError("weights live on different grids");
    check_positive_weight(h1_, "h1");
    check_positive_weight(h2_, "h2");
}

Weights Weights::unit(TorusGrid grid) {
    return Weights(TorusField::constant(grid, 1.0), TorusField::constant(grid, 1.0));
}

FunctionalValue evaluate_J(const TorusField& u, RhoPair rho, Intensity a, const Weights& h) {
    FunctionalValue out;
    const double mean = u.integral();
    out.dirichlet = dirichlet_energy(u);
    out.rho1_term = rho.rho1 * (log_mean_exp(u, h.h1(), 1.0) - mean);
    out.rho2_term = rho.rho2 * (log_mean_exp(u, h.h2(), a.value()) - a.value() * mean);
    out.total = out.dirichlet - out.rho1_term - out.rho2_term;
    return out;
}

std::pair<TorusField, TorusField> normalize_components(const TorusField& u, Intensity a, const Weights& h) {
    const double l1 = log_mean_exp(u, h.h1(), 1.0);
    const double l2 = log_mean_exp(u, h.h2(), a.value());
    TorusField u1 = u;
    TorusField u2 = u;
    for (std::size_t i = 0; i < u.size(); ++i) {
        u1[i] = u[i] - l1;
        u2[i] = a.value() * u[i] - l2;
    }
    return {std::move(u1), std::move(u2)};
}

TorusField el_residual(const TorusField& u, RhoPair rho, Intensity a, const Weights& h) {
    const auto [u1, u2] = normalize_components(u, a, h);
    TorusField r = laplacian(u);
    const double av = a.value();
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double n1 = h.h1()[i] * std::exp(u1[i]);
        const double n2 = h.h2()[i] * std::exp(u2[i]);
        r[i] = -r[i] - rho.rho1 * (n1 - 1.0) - av * rho.rho2 * (n2 - 1.0);
    }
    return r;
}

double mt_deficit(const TorusField& u, Intensity a, double rho2) {
    const double limit = min_mass_rho2(a);
    if (rho2 > limit + 1e-12 * std::abs(limit)) {
        throw ValidationError("mt_deficit requires rho2 <= 8 pi / a^2 - 16 pi / a");
    }
    const TorusField centered = u.mean_zero();
    const TorusField one = TorusField::constant(u.grid(), 1.0);
    return dirichlet_energy(centered) - 8.0 * pi * log_mean_exp(centered, one, 1.0) -
           rho2 * log_mean_exp(centered, one, a.value());
}

FamilySlope improved_mt_family_test(int k, double rho1, Intensity a, double rho2,
                                    const std::vector<double>& lambdas, TorusGrid grid) {
    if (k < 1) throw ValidationError("family test needs k >= 1");
    if (lambdas.size() < 2) throw ValidationError("family test needs at least two lambdas");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] < 10.0) throw ValidationError("family test lambdas must be >= 10");
        if (i > 0 && !(lambdas[i] > lambdas[i - 1])) {
            throw ValidationError("family test lambdas must be increasing");
        }
    }
    const Barycenter sigma = equal_weight_barycenter(k + 1);
    const Weights unit = Weights::unit(grid);

    FamilySlope out;
    std::vector<double> xs;
    std::vector<double> ys;
    for (double lambda : lambdas) {
        const BubbleField bubble = build_bubble({sigma, lambda}, grid);
        const FunctionalValue value = evaluate_J(bubble.u, {rho1, rho2}, a, unit);
        out.samples.push_back({lambda, value});
        xs.push_back(std::log(lambda));
        ys.push_back(value.total);
    }
    out.slope = fit_log_slope(xs, ys).slope;
    out.predicted = 16.0 * (k + 1) * pi - 2.0 * rho1 - rho2 * std::max(0.0, 4.0 * a.value() - 2.0);
    return out;
}

}  // namespace mflab
