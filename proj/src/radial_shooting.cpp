#include "mflab/radial_shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>

#include "mflab/fitting.hpp"

namespace mflab {

void ShootParams::validate() const {
    Intensity{a};
    if (!(rho1 >= 0.0 && rho2 >= 0.0)) throw ValidationError("shoot: rho1, rho2 must be nonnegative");
    if (!(rho1 > 0.0 || rho2 > 0.0)) throw ValidationError("shoot: at least one of rho1, rho2 must be positive");
    if (!(r_max > 1.0)) throw ValidationError("shoot: r_max must exceed 1");
    if (!(rtol > 0.0 && rtol <= 1e-3) || !(atol > 0.0 && atol <= 1e-3)) {
        throw ValidationError("shoot: tolerances must lie in (0, 1e-3]");
    }
    if (!(max_log_step > 0.0)) throw ValidationError("shoot: max_log_step must be positive");
    if (!std::isfinite(c0) || !std::isfinite(v0)) throw ValidationError("shoot: c0, v0 must be finite");
}

namespace {

using State = std::array<double, 4>;  // v, eta, sigma1, sigma2

struct RadialSystem {
    double rho1;
    double rho2e;  // rho2 e^{c0}
    double a;

    // d/dt with t = log r
    State rhs(double t, const State& y) const {
        const double r2 = std::exp(2.0 * t);
        const double s1 = r2 * rho1 * std::exp(y[0]);
        const double s2 = r2 * rho2e * std::exp(a * y[0]);
        return {-y[1], s1 + a * s2, s1, s2};
    }
};

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
    State out = y;
    for (const auto& [c, k] : terms) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * c * (*k)[i];
    }
    return out;
}

bool finite(const State& y) {
    return std::all_of(y.begin(), y.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

RadialProfile shoot(const ShootParams& p) {
    p.validate();
    const double a = p.a;
    if (p.v0 > 700.0 || (p.rho2 > 0.0 && p.c0 + a * p.v0 > 700.0)) {
        throw ShootError(ShootError::Kind::Overflow, 0.0, "shoot: e^v overflows at the center; lower v0");
    }
    const RadialSystem sys{p.rho1, p.rho2 * std::exp(p.c0), a};
    const double f1 = p.rho1 * std::exp(p.v0);
    const double f2 = sys.rho2e * std::exp(a * p.v0);
    const double f0 = f1 + a * f2;
    if (!std::isfinite(f0)) {
        throw ShootError(ShootError::Kind::Overflow, 0.0, "shoot: e^v overflows at the center; lower v0");
    }

    RadialProfile prof;
    prof.params = p;
    auto record = [&prof](double r, const State& y) {
        prof.r.push_back(r);
        prof.v.push_back(y[0]);
        prof.eta.push_back(y[1]);
        prof.sigma1.push_back(y[2]);
        prof.sigma2.push_back(y[3]);
    };
    record(0.0, {p.v0, 0.0, 0.0, 0.0});

    // Series start: v ~ v0 - f0 r^2 / 4, so eta ~ f0 r^2 / 2.
    const double r0 = std::min(1e-3, 1e-3 / std::sqrt(f0));
    const double r0sq = r0 * r0;
    State y{p.v0 - f0 * r0sq / 4.0, f0 * r0sq / 2.0, f1 * r0sq / 2.0, f2 * r0sq / 2.0};
    double t = std::log(r0);
    const double t_end = std::log(p.r_max);
    record(r0, y);

    double h = std::min(p.max_log_step, 1e-2);
    State k1 = sys.rhs(t, y);
    constexpr long max_steps = 2'000'000;
    for (long step = 0; t < t_end; ++step) {
        if (step > max_steps) {
            throw ShootError(ShootError::Kind::StepFailure, std::exp(t), "shoot: step budget exhausted");
        }
        h = std::min({h, t_end - t, p.max_log_step});
        if (h < 1e-14 * (1.0 + std::abs(t))) {
            throw ShootError(ShootError::Kind::StepFailure, std::exp(t), "shoot: step size underflow");
        }
        const State k2 = sys.rhs(t + c2 * h, axpy(y, h, {{a21, &k1}}));
        const State k3 = sys.rhs(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
        const State k4 = sys.rhs(t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const State k5 = sys.rhs(t + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const State k6 =
            sys.rhs(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const State y_new = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const State k7 = sys.rhs(t + h, y_new);

        double err = 0.0;
        bool ok = finite(y_new) && finite(k7);
        if (ok) {
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double scale = p.atol + p.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
                err = std::max(err, std::abs(e) / scale);
            }
        }
        if (ok && err <= 1.0) {
            t += h;
            y = y_new;
            k1 = k7;
            record(std::exp(t), y);
            const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h *= grow;
        } else {
            h *= ok ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.25;
        }
    }
    prof.r.back() = p.r_max;
    return prof;
}

double limit_mass(const RadialProfile& profile, std::pair<double, double> window) {
    const auto [lo, hi] = window;
    const double r_max = profile.r.back();
    if (!(lo > 1.0 && hi > lo && hi <= r_max * (1.0 + 1e-12))) {
        throw ValidationError("limit_mass: fit window must lie inside (1, r_max]");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    double eta_lo = 0.0;
    double eta_hi = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double r = profile.r[i];
        if (r < lo) {
            eta_lo = profile.eta[i];
            continue;
        }
        if (r > hi * (1.0 + 1e-12)) break;
        if (xs.empty()) eta_lo = profile.eta[i];
        xs.push_back(std::log(r));
        ys.push_back(profile.v[i]);
        eta_hi = profile.eta[i];
    }
    if (xs.size() < 2) throw ValidationError("limit_mass: fewer than two samples in the fit window");
    const double slope = -fit_line(xs, ys).slope;
    const double eta_end = profile.final_eta();
    if (std::abs(eta_hi - eta_lo) >= 0.01 * std::abs(eta_hi)) {
        throw NonConvergedError("limit_mass: eta still drifts across the fit window", slope);
    }
    if (std::abs(slope - eta_end) >= 0.05 * eta_end) {
        throw NonConvergedError("limit_mass: fitted decay disagrees with eta(r_max)", slope);
    }
    return slope;
}

double verify_pohozaev(const RadialProfile& profile) {
    const double eta = profile.eta.back();
    return std::abs(eta * eta - 4.0 * (profile.sigma1.back() + profile.sigma2.back()));
}

std::string to_string(SweepStatus s) {
    switch (s) {
        case SweepStatus::Converged: return "converged";
        case SweepStatus::NonConverged: return "nonconverged";
        case SweepStatus::OutsideInterval: return "outside_interval";
        case SweepStatus::StepFailure: return "step_failure";
        case SweepStatus::Overflow: return "overflow";
    }
    return "unknown";
}

std::vector<SweepRow> sweep_eta(double a, const std::vector<double>& c0_grid,
                                const std::vector<double>& ratio_grid, ShootParams base,
                                std::pair<double, double> window) {
    const Intensity intensity(a);
    if (c0_grid.empty() || ratio_grid.empty()) throw ValidationError("sweep_eta: grids must be nonempty");
    const auto [lo, hi] = admissible_eta_interval(intensity);
    base.a = a;

    auto cell = [=](double c0, double ratio) {
        SweepRow row{a, c0, ratio};
        ShootParams p = base;
        p.c0 = c0;
        p.rho2 = ratio * base.rho1;
        try {
            const RadialProfile prof = shoot(p);
            row.sigma1 = prof.sigma1.back();
            row.sigma2 = prof.sigma2.back();
            row.eta = prof.final_eta();
            row.pohozaev_residual = verify_pohozaev(prof);
            try {
                row.eta = limit_mass(prof, window);
                row.status = (row.eta > lo && row.eta < hi) ? SweepStatus::Converged : SweepStatus::OutsideInterval;
            } catch (const NonConvergedError&) {
                row.status = SweepStatus::NonConverged;
            }
        } catch (const ShootError& e) {
            row.status = e.kind() == ShootError::Kind::Overflow ? SweepStatus::Overflow : SweepStatus::StepFailure;
        }
        return row;
    };
    base.rho2 = base.rho1;
    base.validate();

    std::vector<std::future<SweepRow>> jobs;
    for (double c0 : c0_grid) {
        for (double ratio : ratio_grid) jobs.push_back(std::async(std::launch::async, cell, c0, ratio));
    }
    std::vector<SweepRow> rows;
    for (auto& j : jobs) rows.push_back(j.get());
    return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << "a,c0,ratio,sigma1,sigma2,eta,pohozaev_residual,status\n" << std::setprecision(17);
    for (const auto& r : rows) {
        os << r.a << ',' << r.c0 << ',' << r.ratio << ',' << r.sigma1 << ',' << r.sigma2 << ',' << r.eta << ','
           << r.pohozaev_residual << ',' << to_string(r.status) << '\n';
    }
}

void write_profile_csv(const std::filesystem::path& path, const RadialProfile& profile) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << "r,v,eta,sigma1,sigma2\n" << std::setprecision(17);
    for (std::size_t i = 0; i < profile.size(); ++i) {
        os << profile.r[i] << ',' << profile.v[i] << ',' << profile.eta[i] << ',' << profile.sigma1[i] << ','
           << profile.sigma2[i] << '\n';
    }
}

}  // namespace mflab
