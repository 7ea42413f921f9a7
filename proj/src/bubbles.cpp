#include "mflab/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "mflab/errors.hpp"
#include "mflab/fitting.hpp"
#include "mflab/functional.hpp"

namespace mflab {

namespace {

TorusField raw_bubble(const BubbleSpec& spec, TorusGrid grid) {
    if (!(spec.lambda > 1.0)) throw ValidationError("bubble lambda must exceed 1");
    if (spec.lambda > grid.n() / 4.0) {
        throw UnderresolvedError("bubble lambda " + std::to_string(spec.lambda) +
                                 " exceeds n/4 = " + std::to_string(grid.n() / 4.0));
    }
    const auto& atoms = spec.sigma.atoms();
    const double l2 = spec.lambda * spec.lambda;
    return TorusField::sample(grid, [&](TorusPoint p) {
        // log-sum-exp over atoms
        auto term = [&](const WeightedPoint& at) {
            const double d = torus_distance(p, at.point);
            return std::log(at.weight) - 2.0 * std::log1p(l2 * d * d);
        };
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& at : atoms) hi = std::max(hi, term(at));
        double s = 0.0;
        for (const auto& at : atoms) s += std::exp(term(at) - hi);
        return hi + std::log(s);
    });
}

}  // namespace

BubbleField build_bubble(const BubbleSpec& spec, TorusGrid grid) {
    TorusField raw = raw_bubble(spec, grid);
    const double mean = raw.integral();
    return {raw.mean_zero(), mean};
}

std::vector<TorusPoint> separated_atoms(int count, double min_separation) {
    if (count < 1) throw AtomPlacementError("atom count must be positive");
    static const TorusPoint preset[] = {{0.2, 0.2}, {0.7, 0.7}, {0.7, 0.2}, {0.2, 0.7}, {0.45, 0.45}};
    std::vector<TorusPoint> pts;
    if (count <= 5) {
        pts.assign(preset, preset + count);
    } else {
        // greedy farthest-point placement on a lattice
        pts.push_back({0.0, 0.0});
        constexpr int lattice = 40;
        while (static_cast<int>(pts.size()) < count) {
            TorusPoint best{};
            double best_d = -1.0;
            for (int iy = 0; iy < lattice; ++iy) {
                for (int ix = 0; ix < lattice; ++ix) {
                    const TorusPoint c{static_cast<double>(ix) / lattice, static_cast<double>(iy) / lattice};
                    double d = std::numeric_limits<double>::infinity();
                    for (const auto& p : pts) d = std::min(d, torus_distance(p, c));
                    if (d > best_d) {
                        best_d = d;
                        best = c;
                    }
                }
            }
            pts.push_back(best);
        }
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (torus_distance(pts[i], pts[j]) < min_separation) {
                throw AtomPlacementError("cannot place " + std::to_string(count) + " atoms " +
                                         std::to_string(min_separation) + " apart");
            }
        }
    }
    return pts;
}

Barycenter equal_weight_barycenter(int k) {
    std::vector<WeightedPoint> atoms;
    for (const auto& p : separated_atoms(k, 0.3)) atoms.push_back({p, 1.0 / k});
    return Barycenter(std::move(atoms));
}

std::vector<double> geometric_ladder(double lo, double hi, int count) {
    if (!(lo > 0.0 && hi > lo) || count < 2) throw ValidationError("invalid geometric ladder");
    std::vector<double> out(count);
    const double ratio = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) out[i] = lo * std::exp(ratio * i);
    out.back() = hi;
    return out;
}

std::vector<LadderPoint> evaluate_ladder(const Barycenter& sigma, const std::vector<double>& lambdas,
                                         TorusGrid grid, RhoPair rho, Intensity a) {
    const Weights unit = Weights::unit(grid);
    const TorusField one = TorusField::constant(grid, 1.0);
    std::vector<LadderPoint> out;
    for (double lambda : lambdas) {
        const TorusField raw = raw_bubble({sigma, lambda}, grid);
        const TorusField centered = raw.mean_zero();
        LadderPoint p;
        p.lambda = lambda;
        p.energy = dirichlet_energy(raw);
        p.log_int = log_mean_exp(raw, one, 1.0);
        p.avg = raw.integral();
        p.log_int_scaled = log_mean_exp(raw, one, a.value());
        const auto g = gradient(raw);
        for (std::size_t i = 0; i < raw.size(); ++i) {
            p.max_grad = std::max(p.max_grad, std::hypot(g[0][i], g[1][i]));
        }
        p.j_total = evaluate_J(centered, rho, a, unit).total;
        out.push_back(p);
    }
    return out;
}

namespace {

std::vector<double> log_lambdas(const std::vector<LadderPoint>& ladder) {
    std::vector<double> xs;
    for (const auto& p : ladder) xs.push_back(std::log(p.lambda));
    return xs;
}

}  // namespace

GradientEstimate verify_gradient_estimate(const Barycenter& sigma, const std::vector<double>& lambdas,
                                          TorusGrid grid) {
    GradientEstimate out;
    out.ladder = evaluate_ladder(sigma, lambdas, grid, {0.0, 0.0}, Intensity(0.5));
    std::vector<double> ys;
    for (const auto& p : out.ladder) {
        ys.push_back(p.energy);
        out.max_grad_ratio = std::max(out.max_grad_ratio, p.max_grad / p.lambda);
    }
    const LineFit fit = fit_log_slope(log_lambdas(out.ladder), ys);
    out.coefficient = fit.slope;
    out.intercept = fit.intercept;
    return out;
}

VolumeEstimate verify_volume_estimates(const Barycenter& sigma, const std::vector<double>& lambdas,
                                       TorusGrid grid, Intensity a) {
    VolumeEstimate out;
    out.ladder = evaluate_ladder(sigma, lambdas, grid, {0.0, 0.0}, a);
    const auto xs = log_lambdas(out.ladder);
    std::vector<double> li;
    std::vector<double> av;
    std::vector<double> ls;
    for (const auto& p : out.ladder) {
        li.push_back(p.log_int);
        av.push_back(p.avg);
        ls.push_back(p.log_int_scaled);
    }
    out.log_int_coeff = fit_log_slope(xs, li).slope;
    out.avg_coeff = fit_log_slope(xs, av).slope;
    out.scaled_coeff = fit_log_slope(xs, ls).slope;
    return out;
}

double concentration_fraction(const BubbleSpec& spec, TorusGrid grid, int atom, double radius) {
    const TorusField raw = raw_bubble(spec, grid);
    const TorusPoint center = spec.sigma.atoms().at(static_cast<std::size_t>(atom)).point;
    const double shift = raw.max();
    long double inside = 0.0L;
    long double total = 0.0L;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double w = std::exp(raw[i] - shift);
        total += w;
        if (torus_distance(grid.point(i), center) < radius) inside += w;
    }
    return static_cast<double>(inside / total);
}

void write_ladder_csv(const std::filesystem::path& path, const std::vector<LadderPoint>& ladder) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << "lambda,energy,log_int,avg,J_total\n" << std::setprecision(17);
    for (const auto& p : ladder) {
        os << p.lambda << ',' << p.energy << ',' << p.log_int << ',' << p.avg << ',' << p.j_total << '\n';
    }
}

}  // namespace mflab
