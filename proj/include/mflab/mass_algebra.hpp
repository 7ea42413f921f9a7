#pragma once

#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace mflab {

inline constexpr double pi = std::numbers::pi;

/// Intensity ratio of the second vortex species, restricted to (0, 1).
class Intensity {
public:
    explicit Intensity(double a);
    double value() const noexcept { return a_; }
    operator double() const noexcept { return a_; }

private:
    double a_;
};

/// Absolute mass parameters (they carry the factor 2*pi, e.g. 8*pi).
struct RhoPair {
    double rho1 = 0.0;
    double rho2 = 0.0;
};

/// Local blow-up masses in units of 2*pi. Extended precision so that tabulated
/// pairs with sigma2 ~ 1/a^2 sit on the mass curve to well below 1e-9.
struct MassPair {
    long double sigma1 = 0.0L;
    long double sigma2 = 0.0L;
};

/// Masses are carried in units of 2*pi internally; thresholds are absolute.
inline constexpr double to_absolute_mass(double sigma) noexcept { return 2.0 * pi * sigma; }
inline constexpr double to_sigma_units(double mass) noexcept { return mass / (2.0 * pi); }

enum class BlowupKind { Pure1, Pure2, Threshold, FullLimit, MultiBubble, NotAdmissible };

std::string to_string(BlowupKind kind);

/// Classification result. `pair` is the canonical representative of the
/// type: the exact tabulated masses for Pure1/Pure2/Threshold/MultiBubble,
/// the input sigma1 with sigma2 projected onto the Pohozaev curve for
/// FullLimit, and the raw input for NotAdmissible.
struct BlowupType {
    BlowupKind kind = BlowupKind::NotAdmissible;
    MassPair pair;
    int m = 0;  // bubble count, MultiBubble only
};

struct GammaRoots {
    std::vector<double> roots;  // ascending, a double root appears once
    bool double_root = false;

    bool empty() const noexcept { return roots.empty(); }
};

struct IntensityAtom {
    double alpha = 0.0;
    double weight = 0.0;
};

/// Finitely supported intensity distribution on [-1, 1].
class AtomicIntensity {
public:
    explicit AtomicIntensity(std::vector<IntensityAtom> atoms);

    /// tau * delta_1 + (1 - tau) * delta_a
    static AtomicIntensity two_atoms(double tau, double a);

    const std::vector<IntensityAtom>& atoms() const noexcept { return atoms_; }

private:
    std::vector<IntensityAtom> atoms_;
};

/// 4(s1 + s2) - (s1 + a s2)^2, zero on the Pohozaev mass curve.
double pohozaev_residual(MassPair mp, Intensity a);

/// Real roots of a^2 x^2 + (8ma - 4) x + 16 m (m - 1) = 0.
GammaRoots solve_gamma_m(int m, Intensity a);

double discriminant_gamma_m(int m, Intensity a);

/// Positive sigma2 on the Pohozaev curve for a given sigma1 >= 0.
double pohozaev_partner(double sigma1, Intensity a);

BlowupType classify_local_mass(MassPair mp, Intensity a, double tol);

/// 8 pi / a^2 - 16 pi / a, the smallest second-component mass of a
/// fully blown-up bubble for a < 1/2.
double min_mass_rho2(Intensity a);

/// Open interval of attainable total masses for the coupled limit
/// profile, in units of 2*pi.
std::pair<double, double> admissible_eta_interval(Intensity a);

/// Largest rho for which the functional of the intensity distribution is
/// bounded from below. At most 20 atoms.
double sharp_threshold(const AtomicIntensity& p);

/// Closed form of sharp_threshold for tau * delta_1 + (1 - tau) * delta_a.
double sharp_threshold_two_atoms(double tau, double a);

bool coercive_region(RhoPair rho, Intensity a);

}  // namespace mflab
