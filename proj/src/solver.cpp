#include "mflab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace mflab {

void SolveConfig::validate() const {
    const auto& nw = newton;
    if (!(nw.residual_tol >= 1e-12 && nw.residual_tol <= 1e-6)) {
        throw ValidationError("residual_tol must lie in [1e-12, 1e-6]");
    }
    if (nw.max_iter < 1 || nw.cg_max_iter < 1) throw ValidationError("iteration caps must be positive");
    if (!(nw.damping_factor > 0.0 && nw.damping_factor < 1.0)) {
        throw ValidationError("damping factor must lie in (0, 1)");
    }
    if (!(nw.damping_floor > 0.0 && nw.damping_floor <= 1.0)) {
        throw ValidationError("damping floor must lie in (0, 1]");
    }
    if (!(nw.cg_rtol > 0.0 && nw.cg_rtol < 1.0)) throw ValidationError("cg_rtol must lie in (0, 1)");
    if (!(rho.rho1 >= 0.0 && rho.rho2 >= 0.0)) throw ValidationError("rho must be nonnegative");
    if (!(continuation.step > 0.0)) throw ValidationError("continuation step must be positive");
    if (continuation.max_backtracks < 0) throw ValidationError("max_backtracks must be nonnegative");
    for (const auto& w : continuation.path) {
        if (!(w.rho1 >= 0.0 && w.rho2 >= 0.0)) throw ValidationError("path rho must be nonnegative");
    }
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::Diverged: return "diverged";
        case SolveStatus::SingularJacobian: return "singular_jacobian";
    }
    return "unknown";
}

namespace {

void project_mean_zero(TorusField& f) {
    const double m = f.integral();
    for (auto& x : f.values()) x -= m;
}

double l2_norm(const TorusField& f) { return std::sqrt(inner(f, f)); }

bool all_finite(const TorusField& f) {
    return std::all_of(f.values().begin(), f.values().end(), [](double x) { return std::isfinite(x); });
}

// Linearization of el_residual at a fixed u; the normalized densities carry
// the rank-one correction from their denominators.
class Jacobian {
public:
    Jacobian(const TorusField& u, RhoPair rho, Intensity a, const Weights& h)
        : rho_(rho), a_(a.value()), n1_(u.grid()), n2_(u.grid()) {
        const auto [u1, u2] = normalize_components(u, a, h);
        for (std::size_t i = 0; i < u.size(); ++i) {
            n1_[i] = h.h1()[i] * std::exp(u1[i]);
            n2_[i] = h.h2()[i] * std::exp(u2[i]);
        }
    }

    TorusField apply(const TorusField& v) const {
        TorusField out = laplacian(v);
        const double m1 = inner(n1_, v);
        const double m2 = inner(n2_, v);
        const double c2 = a_ * a_ * rho_.rho2;
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = -out[i] - rho_.rho1 * n1_[i] * (v[i] - m1) - c2 * n2_[i] * (v[i] - m2);
        }
        return out;
    }

private:
    RhoPair rho_;
    double a_;
    TorusField n1_;
    TorusField n2_;
};

enum class CgOutcome { Ok, Breakdown, Stalled };

// Preconditioned CG with (-Lap)^{-1}. The operator may be indefinite, so the
// only guard is a curvature that vanishes relative to the Laplacian energy.
CgOutcome conjugate_gradient(const Jacobian& J, const TorusField& b, TorusField& x, const NewtonOptions& opt) {
    x = TorusField(b.grid());
    TorusField r = b;
    project_mean_zero(r);
    const double bnorm = l2_norm(r);
    if (bnorm == 0.0) return CgOutcome::Ok;
    TorusField z = poisson_solve(r);
    TorusField p = z;
    double rz = inner(r, z);
    for (int it = 0; it < opt.cg_max_iter; ++it) {
        const TorusField Ap = J.apply(p);
        const double pAp = inner(p, Ap);
        const double lap_energy = 2.0 * dirichlet_energy(p);
        if (!(std::abs(pAp) > 1e-10 * lap_energy)) return CgOutcome::Breakdown;
        const double alpha = rz / pAp;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        project_mean_zero(r);
        if (l2_norm(r) <= opt.cg_rtol * bnorm) return CgOutcome::Ok;
        z = poisson_solve(r);
        const double rz_new = inner(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
    return CgOutcome::Stalled;
}

SolutionRecord make_record(const SolveConfig& cfg, TorusField u, const TorusField& F, int iterations,
                           SolveStatus status) {
    const FunctionalValue J = evaluate_J(u, cfg.rho, cfg.a, cfg.h);
    return SolutionRecord{std::move(u), F.sup_norm(), cfg.rho, iterations, J, status, cfg.a, cfg.h};
}

}  // namespace

SolutionRecord newton_solve(const SolveConfig& cfg, const TorusField& u0) {
    cfg.validate();
    if (!(u0.grid() == cfg.grid())) throw ValidationError("initial field and weights live on different grids");
    if (std::abs(u0.integral()) > 1e-10) throw NonZeroMeanError("newton_solve needs a mean-zero initial field");
    const NewtonOptions& opt = cfg.newton;

    TorusField u = u0;
    TorusField F = el_residual(u, cfg.rho, cfg.a, cfg.h);
    if (!all_finite(F)) throw ValidationError("initial field overflows the nonlinearity");
    for (int it = 1; it <= opt.max_iter; ++it) {
        if (F.sup_norm() < opt.residual_tol) return make_record(cfg, std::move(u), F, it, SolveStatus::Converged);

        const Jacobian J(u, cfg.rho, cfg.a, cfg.h);
        TorusField delta(u.grid());
        const CgOutcome cg = conjugate_gradient(J, -1.0 * F, delta, opt);
        if (cg != CgOutcome::Ok) {
            throw SolveError(cg == CgOutcome::Breakdown ? "CG breakdown: Jacobian nearly singular"
                                                        : "CG did not converge: Jacobian nearly singular",
                             make_record(cfg, std::move(u), F, it, SolveStatus::SingularJacobian));
        }

        // Armijo backtracking on the L2 residual
        const double f0 = l2_norm(F);
        double t = 1.0;
        TorusField trial = u;
        TorusField Ft = F;
        for (;;) {
            for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + t * delta[i];
            project_mean_zero(trial);
            Ft = el_residual(trial, cfg.rho, cfg.a, cfg.h);
            if (all_finite(Ft) && l2_norm(Ft) <= (1.0 - 1e-4 * t) * f0) break;
            if (t * opt.damping_factor < opt.damping_floor) break;
            t *= opt.damping_factor;
        }
        if (!all_finite(Ft)) {
            throw SolveError("Newton step overflowed",
                             make_record(cfg, std::move(u), F, it, SolveStatus::Diverged));
        }
        u = std::move(trial);
        F = std::move(Ft);
    }
    if (F.sup_norm() < opt.residual_tol) {
        return make_record(cfg, std::move(u), F, opt.max_iter, SolveStatus::Converged);
    }
    throw SolveError("Newton iteration cap reached",
                     make_record(cfg, std::move(u), F, opt.max_iter, SolveStatus::Diverged));
}

namespace {

bool in_existence_region(RhoPair rho, Intensity a) {
    const double ratio = rho.rho1 / (8.0 * pi);
    if (std::abs(ratio - std::round(ratio)) < 1e-9 && ratio > 0.5) return false;
    if (coercive_region(rho, a)) return true;
    return a.value() < 0.5 && rho.rho2 < min_mass_rho2(a);
}

}  // namespace

std::vector<SolutionRecord> continuation_run(const SolveConfig& cfg) {
    cfg.validate();
    const auto& path = cfg.continuation.path;
    std::vector<SolutionRecord> records;
    if (path.empty()) return records;
    if (!cfg.continuation.allow_blowup_study) {
        for (const auto& w : path) {
            if (!in_existence_region(w, cfg.a)) {
                throw ValidationError("path waypoint outside the solvable region; set allow_blowup_study");
            }
        }
    }

    SolveConfig local = cfg;
    auto solve_at = [&](RhoPair rho, const TorusField& start) {
        local.rho = rho;
        return newton_solve(local, start);
    };

    TorusField u(cfg.grid());
    try {
        records.push_back(solve_at(path.front(), u));
    } catch (const SolveError& e) {
        throw PathStuckError(std::string("no solution at the first waypoint: ") + e.what(), records, path.front(),
                             e.last().u.sup_norm());
    }
    u = records.back().u;
    RhoPair current = path.front();

    for (std::size_t w = 1; w < path.size(); ++w) {
        const RhoPair target = path[w];
        for (;;) {
            const double d1 = target.rho1 - current.rho1;
            const double d2 = target.rho2 - current.rho2;
            const double dist = std::hypot(d1, d2);
            if (dist == 0.0) break;
            double s = std::min(cfg.continuation.step, dist);
            for (int backtracks = 0;; ++backtracks) {
                const RhoPair next = s == dist ? target
                                               : RhoPair{current.rho1 + s * d1 / dist, current.rho2 + s * d2 / dist};
                try {
                    records.push_back(solve_at(next, u));
                    u = records.back().u;
                    current = next;
                    break;
                } catch (const SolveError& e) {
                    if (backtracks >= cfg.continuation.max_backtracks) {
                        throw PathStuckError(std::string("continuation stuck: ") + e.what(), records, next,
                                             u.sup_norm());
                    }
                    s *= 0.5;
                }
            }
        }
    }
    return records;
}

BlowupReport blowup_diagnostics(const SolutionRecord& rec, double ball_radius, DiagnosticsOptions opts) {
    const TorusGrid grid = rec.u.grid();
    const int n = grid.n();
    if (!(ball_radius > 2.0 / n && ball_radius < 0.25)) {
        throw ValidationError("ball_radius must lie in (2/n, 0.25)");
    }
    const auto [u1, u2] = normalize_components(rec.u, rec.a, rec.h);
    TorusField M(grid);
    for (std::size_t i = 0; i < M.size(); ++i) M[i] = std::max(u1[i], u2[i]);

    BlowupReport rep;
    rep.rho = rec.rho;
    rep.ball_radius = ball_radius;
    rep.sup_norm = rec.u.sup_norm();
    rep.sup_M = M.max();

    // candidate peaks: 8-neighbour local maxima near the top, highest first
    std::vector<std::size_t> cand;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double m = M(ix, iy);
            if (m < rep.sup_M - opts.peak_drop) continue;
            if (m + 2.0 * std::log(ball_radius) <= opts.concentration_margin) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if ((dx || dy) && M((ix + dx + n) % n, (iy + dy + n) % n) > m) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) cand.push_back(grid.index(ix, iy));
        }
    }
    std::stable_sort(cand.begin(), cand.end(), [&](std::size_t i, std::size_t j) { return M[i] > M[j]; });
    const double merge = opts.merge_cells * grid.spacing();
    for (std::size_t c : cand) {
        const TorusPoint p = grid.point(c);
        const bool near = std::any_of(rep.peak_set.begin(), rep.peak_set.end(),
                                      [&](TorusPoint q) { return torus_distance(p, q) < merge; });
        if (!near) rep.peak_set.push_back(p);
    }

    // masses: every point goes to its nearest peak
    const std::size_t k = rep.peak_set.size();
    std::vector<std::array<long double, 6>> acc(k, std::array<long double, 6>{});
    long double res1 = 0.0L;
    long double res2 = 0.0L;
    const double dA = grid.cell_area();
    const double floor_dist = 0.5 * grid.spacing();
    const double diameter = std::sqrt(0.5);
    double sel = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < M.size(); ++i) {
        const double m1 = rec.rho.rho1 * rec.h.h1()[i] * std::exp(u1[i]) * dA;
        const double m2 = rec.rho.rho2 * rec.h.h2()[i] * std::exp(u2[i]) * dA;
        const TorusPoint x = grid.point(i);
        std::size_t best = k;
        double d = diameter;
        for (std::size_t j = 0; j < k; ++j) {
            const double dj = torus_distance(x, rep.peak_set[j]);
            if (dj < d) {
                d = dj;
                best = j;
            }
        }
        sel = std::max(sel, M[i] + 2.0 * std::log(std::max(d, floor_dist)));
        if (best == k || d >= ball_radius) {
            res1 += m1;
            res2 += m2;
            continue;
        }
        for (int level = 0; level < 3; ++level) {
            if (d < ball_radius / (1 << level)) {
                acc[best][2 * level] += m1;
                acc[best][2 * level + 1] += m2;
            }
        }
    }
    rep.selection_bound = sel;
    rep.residual_masses = {static_cast<double>(res1), static_cast<double>(res2)};
    for (const auto& a : acc) {
        std::array<MassPair, 3> ladder;
        for (int level = 0; level < 3; ++level) {
            ladder[level] = {static_cast<double>(a[2 * level]), static_cast<double>(a[2 * level + 1])};
        }
        rep.local_masses.push_back(ladder[0]);
        rep.mass_ladder.push_back(ladder);
        // m(r) ~ m0 + c r^2 near a point mass
        rep.richardson.push_back({ladder[2].sigma1 - (ladder[1].sigma1 - ladder[2].sigma1) / 3.0,
                                  ladder[2].sigma2 - (ladder[1].sigma2 - ladder[2].sigma2) / 3.0});
    }
    return rep;
}

BlowupClassification classify_blowup(const BlowupReport& report, Intensity a, double tol) {
    BlowupClassification out;
    for (const auto& m : report.local_masses) {
        const MassPair s{to_sigma_units(m.sigma1), to_sigma_units(m.sigma2)};
        out.types.push_back(classify_local_mass(s, a, tol));
        if (s.sigma1 > tol) out.r1_check_applies = true;
    }
    out.r1_residual_sigma = to_sigma_units(report.residual_masses.sigma1);
    out.r1_small = !out.r1_check_applies || out.r1_residual_sigma < tol;
    return out;
}

void write_config_snapshot(const std::filesystem::path& path, const SolveConfig& cfg) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << std::setprecision(17);
    os << "n = " << cfg.grid().n() << '\n'
       << "a = " << cfg.a.value() << '\n'
       << "rho1 = " << cfg.rho.rho1 << '\n'
       << "rho2 = " << cfg.rho.rho2 << '\n'
       << "max_iter = " << cfg.newton.max_iter << '\n'
       << "residual_tol = " << cfg.newton.residual_tol << '\n'
       << "damping_factor = " << cfg.newton.damping_factor << '\n'
       << "damping_floor = " << cfg.newton.damping_floor << '\n'
       << "cg_max_iter = " << cfg.newton.cg_max_iter << '\n'
       << "cg_rtol = " << cfg.newton.cg_rtol << '\n'
       << "step = " << cfg.continuation.step << '\n'
       << "max_backtracks = " << cfg.continuation.max_backtracks << '\n';
    for (std::size_t i = 0; i < cfg.continuation.path.size(); ++i) {
        os << "path" << i << " = " << cfg.continuation.path[i].rho1 << ',' << cfg.continuation.path[i].rho2 << '\n';
    }
}

void write_diagnostics_csv(const std::filesystem::path& path, const BlowupReport& r) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << "peak,x,y,m1_R,m2_R,m1_R2,m2_R2,m1_R4,m2_R4,m1_extrap,m2_extrap\n" << std::setprecision(17);
    for (std::size_t j = 0; j < r.peak_set.size(); ++j) {
        os << j << ',' << r.peak_set[j].x << ',' << r.peak_set[j].y;
        for (const auto& m : r.mass_ladder[j]) os << ',' << m.sigma1 << ',' << m.sigma2;
        os << ',' << r.richardson[j].sigma1 << ',' << r.richardson[j].sigma2 << '\n';
    }
    os << "residual,,," << r.residual_masses.sigma1 << ',' << r.residual_masses.sigma2 << ",,,,,,\n";
}

void write_records_csv(const std::filesystem::path& path, const std::vector<SolutionRecord>& records) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << "rho1,rho2,iterations,residual_norm,J,sup_norm,status\n" << std::setprecision(17);
    for (const auto& r : records) {
        os << r.rho.rho1 << ',' << r.rho.rho2 << ',' << r.iterations << ',' << r.residual_norm << ','
           << r.J_value.total << ',' << r.u.sup_norm() << ',' << to_string(r.status) << '\n';
    }
}

void persist_run(const std::filesystem::path& dir, const SolveConfig& cfg, const SolutionRecord& rec,
                 const BlowupReport& report) {
    std::filesystem::create_directories(dir);
    write_config_snapshot(dir / "config.txt", cfg);
    write_field_binary(dir / "h1.bin", cfg.h.h1());
    write_field_binary(dir / "h2.bin", cfg.h.h2());
    write_field_binary(dir / "u.bin", rec.u);
    write_diagnostics_csv(dir / "diagnostics.csv", report);
}

}  // namespace mflab
