#pragma once

#include <vector>

#include "mflab/mass_algebra.hpp"
#include "mflab/measures.hpp"
#include "mflab/torus_field.hpp"

namespace mflab {

struct BubbleSpec {
    Barycenter sigma;
    double lambda;
};

struct BubbleField {
    TorusField u;         // mean-zero projection
    double subtracted_mean = 0.0;
};

/// Samples log sum_i t_i (1 + lambda^2 d(x, x_i)^2)^{-2} and projects it to
/// mean zero. Requires lambda <= n / 4.
BubbleField build_bubble(const BubbleSpec& spec, TorusGrid grid);

/// `count` points pairwise at least `min_separation` apart on the torus.
std::vector<TorusPoint> separated_atoms(int count, double min_separation);

/// Equal-weight barycenter on separated_atoms(k, 0.3).
Barycenter equal_weight_barycenter(int k);

/// Geometric ladder of `count` values from lo to hi inclusive.
std::vector<double> geometric_ladder(double lo, double hi, int count);

struct LadderPoint {
    double lambda = 0.0;
    double energy = 0.0;   // (1/2) int |grad phi|^2
    double log_int = 0.0;  // log int e^{phi_raw}
    double avg = 0.0;      // int phi_raw
    double log_int_scaled = 0.0;  // log int e^{a phi_raw}
    double max_grad = 0.0;
    double j_total = 0.0;  // J_rho(phi) for the ladder's rho, a
};

struct GradientEstimate {
    double coefficient = 0.0;  // fitted d energy / d log(lambda)
    double intercept = 0.0;
    double max_grad_ratio = 0.0;  // max over ladder of max|grad phi| / lambda
    std::vector<LadderPoint> ladder;
};

struct VolumeEstimate {
    double log_int_coeff = 0.0;  // ~ -2
    double avg_coeff = 0.0;      // ~ -4
    double scaled_coeff = 0.0;   // log int e^{a phi}, ~ -4a for a < 1/2
    std::vector<LadderPoint> ladder;
};

/// Evaluates a bubble ladder: one entry per lambda in `lambdas`, atoms and
/// weights from `sigma`. `rho` and `a` only feed the J_total column.
std::vector<LadderPoint> evaluate_ladder(const Barycenter& sigma, const std::vector<double>& lambdas,
                                         TorusGrid grid, RhoPair rho, Intensity a);

GradientEstimate verify_gradient_estimate(const Barycenter& sigma, const std::vector<double>& lambdas,
                                          TorusGrid grid);

VolumeEstimate verify_volume_estimates(const Barycenter& sigma, const std::vector<double>& lambdas,
                                       TorusGrid grid, Intensity a);

/// Fraction of e^{phi} mass within `radius` of atom `atom`.
double concentration_fraction(const BubbleSpec& spec, TorusGrid grid, int atom, double radius);

void write_ladder_csv(const std::filesystem::path& path, const std::vector<LadderPoint>& ladder);

}  // namespace mflab
