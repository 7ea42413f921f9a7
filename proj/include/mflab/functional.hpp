#pragma once

#include <utility>
#include <vector>

#include "mflab/mass_algebra.hpp"
#include "mflab/torus_field.hpp"

namespace mflab {

/// Positive weight functions h1, h2 of the two exponential terms.
class Weights {
public:
    Weights(TorusField h1, TorusField h2);
    static Weights unit(TorusGrid grid);

    const TorusField& h1() const noexcept { return h1_; }
    const TorusField& h2() const noexcept { return h2_; }

private:
    TorusField h1_;
    TorusField h2_;
};

struct FunctionalValue {
    double total = 0.0;
    double dirichlet = 0.0;
    double rho1_term = 0.0;  // rho1 (log int h1 e^u - int u)
    double rho2_term = 0.0;  // rho2 (log int h2 e^{au} - a int u)
};

FunctionalValue evaluate_J(const TorusField& u, RhoPair rho, Intensity a, const Weights& h);

/// u1 = u - log int h1 e^u and u2 = a u - log int h2 e^{au}.
std::pair<TorusField, TorusField> normalize_components(const TorusField& u, Intensity a, const Weights& h);

/// Pointwise residual of the mean field equation; also the L2 gradient of J.
TorusField el_residual(const TorusField& u, RhoPair rho, Intensity a, const Weights& h);

/// (1/2) int |grad u|^2 - 8 pi log int e^u - rho2 log int e^{au}.
double mt_deficit(const TorusField& u, Intensity a, double rho2);

struct FamilySample {
    double lambda = 0.0;
    FunctionalValue value;
};

struct FamilySlope {
    double slope = 0.0;      // d J / d log(lambda), least squares
    double predicted = 0.0;  // 16 (k+1) pi - 2 rho1
    std::vector<FamilySample> samples;
};

/// Evaluates J along (k+1)-atom equal-weight bubbles with increasing
/// concentration and fits the slope of J against log(lambda).
FamilySlope improved_mt_family_test(int k, double rho1, Intensity a, double rho2,
                                    const std::vector<double>& lambdas, TorusGrid grid);

}  // namespace mflab
