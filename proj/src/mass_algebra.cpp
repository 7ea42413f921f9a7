#include "mflab/mass_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mflab/errors.hpp"

namespace mflab {

Intensity::Intensity(double a) : a_(a) {
    if (!(a > 0.0 && a < 1.0)) {
        throw ValidationError("intensity a must lie in (0, 1), got " + std::to_string(a));
    }
}

std::string to_string(BlowupKind kind) {
    switch (kind) {
        case BlowupKind::Pure1: return "Pure1";
        case BlowupKind::Pure2: return "Pure2";
        case BlowupKind::Threshold: return "Threshold";
        case BlowupKind::FullLimit: return "FullLimit";
        case BlowupKind::MultiBubble: return "MultiBubble";
        case BlowupKind::NotAdmissible: return "NotAdmissible";
    }
    return "NotAdmissible";
}

AtomicIntensity::AtomicIntensity(std::vector<IntensityAtom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ValidationError("intensity distribution needs at least one atom");
    long double total = 0.0L;
    std::set<double> seen;
    for (const auto& at : atoms_) {
        if (!(at.alpha >= -1.0 && at.alpha <= 1.0)) {
            throw ValidationError("atom intensity must lie in [-1, 1]");
        }
        if (!(at.weight > 0.0)) throw ValidationError("atom weights must be positive");
        if (!seen.insert(at.alpha).second) throw ValidationError("atom intensities must be distinct");
        total += at.weight;
    }
    if (std::abs(static_cast<double>(total) - 1.0) > 1e-12) {
        throw ValidationError("atom weights must sum to 1");
    }
}

AtomicIntensity AtomicIntensity::two_atoms(double tau, double a) {
    return AtomicIntensity({{1.0, tau}, {a, 1.0 - tau}});
}

double pohozaev_residual(MassPair mp, Intensity a) {
    // Expanded as s1 (4 - s1) + s2 (4 - 2 a s1 - a^2 s2) in extended precision.
    const long double s1 = mp.sigma1;
    const long double s2 = mp.sigma2;
    const long double al = a.value();
    const long double r = s1 * (4.0L - s1) + s2 * (4.0L - 2.0L * al * s1 - al * al * s2);
    return static_cast<double>(r);
}

double discriminant_gamma_m(int m, Intensity a) {
    // 16 (1 - 2a)^2 - 64 (m - 1) a (1 - a); the square is exact, so m = 1
    // keeps full relative accuracy near a = 1/2.
    const long double av = a.value();
    const long double d = 1.0L - 2.0L * av;
    return static_cast<double>(16.0L * d * d - 64.0L * (m - 1) * av * (1.0L - av));
}


namespace {

// Real roots in extended precision, ascending; a double root appears once.
std::vector<long double> gamma_roots(int m, long double a, bool& double_root) {
    const long double qa = a * a;
    const long double qb = 8.0L * m * a - 4.0L;
    const long double qc = 16.0L * m * (m - 1.0L);
    const long double d = 1.0L - 2.0L * a;
    const long double disc = 16.0L * d * d - 64.0L * (m - 1) * a * (1.0L - a);
    double_root = false;
    if (disc < 0.0L) return {};
    if (disc == 0.0L) {
        double_root = true;
        return {-qb / (2.0L * qa)};
    }
    const long double q = -0.5L * (qb + std::copysign(std::sqrt(disc), qb));
    long double x1 = q / qa;
    long double x2 = (q != 0.0L) ? qc / q : -x1;
    if (x1 > x2) std::swap(x1, x2);
    return {x1, x2};
}

long double partner(long double s1, long double a) {
    // a^2 b^2 + (2 a s1 - 4) b + s1^2 - 4 s1 = 0, largest root.
    const long double qa = a * a;
    const long double qb = 2.0L * a * s1 - 4.0L;
    const long double qc = s1 * s1 - 4.0L * s1;
    const long double disc = qb * qb - 4.0L * qa * qc;
    if (disc < 0.0L) return std::numeric_limits<long double>::quiet_NaN();
    const long double sq = std::sqrt(disc);
    if (qb <= 0.0L) return (-qb + sq) / (2.0L * qa);
    // Both roots nonpositive when b > 0 and c >= 0; the larger is c / q.
    return qc / (-0.5L * (qb + sq));
}

}  // namespace

GammaRoots solve_gamma_m(int m, Intensity a) {
    if (m < 1) throw ValidationError("bubble count m must be >= 1");
    GammaRoots out;
    for (long double r : gamma_roots(m, a.value(), out.double_root)) out.roots.push_back(static_cast<double>(r));
    return out;
}

double pohozaev_partner(double sigma1, Intensity a) { return static_cast<double>(partner(sigma1, a.value())); }

double min_mass_rho2(Intensity a) {
    const double av = a.value();
    return 8.0 * pi / (av * av) - 16.0 * pi / av;
}

std::pair<double, double> admissible_eta_interval(Intensity a) {
    const double av = a.value();
    return {std::max(4.0, 4.0 / av - 4.0), 4.0 / av};
}

namespace {

bool near(long double x, long double target, double tol) { return std::abs(x - target) <= tol; }

}  // namespace

// Canonical pairs are built in extended precision: 4/a^2 rounded to a
// double already misses the mass relation by ~1e-15/a^2.
BlowupType classify_local_mass(MassPair mp, Intensity a, double tol) {
    if (!(tol > 0.0)) throw ValidationError("classification tolerance must be positive");
    if (!(mp.sigma1 >= 0.0L && mp.sigma2 >= 0.0L) || !std::isfinite(mp.sigma1) ||
        !std::isfinite(mp.sigma2)) {
        throw ValidationError("mass pair components must be finite and nonnegative");
    }
    const long double av = a.value();
    const bool low_regime = av < 0.5L;
    const long double pure2 = 4.0L / (av * av);
    const long double threshold2 = 4.0L / (av * av) - 8.0L / av;

    if (near(mp.sigma1, 4.0L, tol) && near(mp.sigma2, 0.0L, tol)) {
        return {BlowupKind::Pure1, {4.0L, 0.0L}, 1};
    }
    if (near(mp.sigma1, 0.0L, tol) && near(mp.sigma2, pure2, tol)) {
        return {BlowupKind::Pure2, {0.0L, pure2}, 0};
    }
    // The threshold pair is the endpoint of the FullLimit branch; it wins ties.
    if (low_regime && near(mp.sigma1, 4.0L, tol) && near(mp.sigma2, threshold2, tol)) {
        return {BlowupKind::Threshold, {4.0L, threshold2}, 1};
    }
    if (low_regime) {
        const int m = static_cast<int>(std::lround(mp.sigma1 / 4.0L));
        bool dbl = false;
        if (m > 1 && near(mp.sigma1, 4.0L * m, tol)) {
            for (long double g : gamma_roots(m, av, dbl)) {
                if (g >= 0.0L && near(mp.sigma2, g, tol)) {
                    return {BlowupKind::MultiBubble, {4.0L * m, g}, m};
                }
            }
        }
    }

    const long double alpha = mp.sigma1;
    if (alpha > 0.0L && alpha < 4.0L) {
        const long double beta = partner(alpha, av);
        if (std::isfinite(beta) && near(mp.sigma2, beta, tol)) {
            const long double lo_beta = low_regime ? threshold2 : 0.0L;
            const long double lo_sum = low_regime ? 4.0L / av - 4.0L : 4.0L;
            if (beta > lo_beta && beta < pure2 && alpha + av * beta > lo_sum) {
                return {BlowupKind::FullLimit, {alpha, beta}, 0};
            }
        }
    }
    return {BlowupKind::NotAdmissible, mp, 0};
}

double sharp_threshold(const AtomicIntensity& p) {
    const auto& atoms = p.atoms();
    if (atoms.size() > 20) throw ValidationError("sharp_threshold supports at most 20 atoms");

    std::vector<IntensityAtom> pos;
    std::vector<IntensityAtom> neg;
    for (const auto& at : atoms) (at.alpha >= 0.0 ? pos : neg).push_back(at);

    double best = std::numeric_limits<double>::infinity();
    auto scan = [&best](const std::vector<IntensityAtom>& side) {
        const std::size_t count = side.size();
        for (std::size_t mask = 1; mask < (std::size_t{1} << count); ++mask) {
            double mass = 0.0;
            double moment = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                if (mask & (std::size_t{1} << i)) {
                    mass += side[i].weight;
                    moment += side[i].alpha * side[i].weight;
                }
            }
            if (moment == 0.0) continue;
            best = std::min(best, mass / (moment * moment));
        }
    };
    scan(pos);
    scan(neg);
    if (!std::isfinite(best)) {
        throw ValidationError("sharp threshold undefined: every atom has zero intensity");
    }
    return 8.0 * pi * best;
}

double sharp_threshold_two_atoms(double tau, double a) {
    const double mixed = tau + a * (1.0 - tau);
    return 8.0 * pi * std::min({1.0 / tau, 1.0 / (a * a * (1.0 - tau)), 1.0 / (mixed * mixed)});
}

bool coercive_region(RhoPair rho, Intensity a) {
    const double av = a.value();
    constexpr double rel = 1e-12;
    const double lhs = (rho.rho1 + av * rho.rho2) * (rho.rho1 + av * rho.rho2);
    const double rhs = 8.0 * pi * (rho.rho1 + rho.rho2);
    return rho.rho1 <= 8.0 * pi * (1.0 + rel) && rho.rho2 <= 8.0 * pi / (av * av) * (1.0 + rel) &&
           lhs <= rhs * (1.0 + rel);
}

}  // namespace mflab
