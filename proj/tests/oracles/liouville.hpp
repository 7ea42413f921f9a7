#pragma once

#include <cmath>

namespace oracle {

// Radial solution of v'' + v'/r + rho e^v = 0, v(0) = v0:
// v = log(8 l^2 / (rho (1 + l^2 r^2)^2)) with l^2 = rho e^{v0} / 8.
struct Liouville {
    double rho;
    double v0;

    double l2() const { return rho * std::exp(v0) / 8.0; }
    double v(double r) const {
        const double q = 1.0 + l2() * r * r;
        return std::log(8.0 * l2() / (rho * q * q));
    }
    // -r v'(r), which is also the enclosed mass in units of 2 pi
    double eta(double r) const {
        const double s = l2() * r * r;
        return 4.0 * s / (1.0 + s);
    }
};

}  // namespace oracle
