#pragma once

#include <span>

namespace mflab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept (at least two points).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least squares y ~ s t + c + e^{-2t} (p + q t) with t = log(lambda). The
/// e^{-2t} terms absorb the finite-lambda corrections of bubble integrals,
/// which bias a plain line fit at lambda ~ 10. Needs at least six samples.
struct AsymptoticFit {
    double slope = 0.0;
    double intercept = 0.0;
    double p = 0.0;
    double q = 0.0;
};

AsymptoticFit fit_log_asymptotic(std::span<const double> t, std::span<const double> y);

/// fit_log_asymptotic when there are enough samples, else fit_line.
LineFit fit_log_slope(std::span<const double> t, std::span<const double> y);

}  // namespace mflab
