#include "mflab/fitting.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "mflab/errors.hpp"

namespace mflab {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("line fit needs >= 2 paired samples");
    const double count = static_cast<double>(x.size());
    long double mx = 0.0L;
    long double my = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= count;
    my /= count;
    long double sxx = 0.0L;
    long double sxy = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0L) throw ValidationError("line fit needs distinct abscissae");
    const long double slope = sxy / sxx;
    return {static_cast<double>(slope), static_cast<double>(my - slope * mx)};
}

AsymptoticFit fit_log_asymptotic(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size() || t.size() < 6) throw ValidationError("asymptotic fit needs >= 6 paired samples");
    const std::size_t m = t.size();
    // modified Gram-Schmidt on unit-normalized columns
    std::array<std::vector<long double>, 4> q;
    std::array<long double, 4> scale{};
    for (auto& c : q) c.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const long double e = std::exp(-2.0L * t[i]);
        q[0][i] = t[i];
        q[1][i] = 1.0L;
        q[2][i] = e;
        q[3][i] = e * t[i];
    }
    std::array<std::array<long double, 4>, 4> r{};
    for (int j = 0; j < 4; ++j) {
        long double norm = 0.0L;
        for (long double v : q[j]) norm += v * v;
        scale[j] = std::sqrt(norm);
        for (auto& v : q[j]) v /= scale[j];
    }
    for (int j = 0; j < 4; ++j) {
        for (int k = 0; k < j; ++k) {
            long double d = 0.0L;
            for (std::size_t i = 0; i < m; ++i) d += q[k][i] * q[j][i];
            r[k][j] = d;
            for (std::size_t i = 0; i < m; ++i) q[j][i] -= d * q[k][i];
        }
        long double norm = 0.0L;
        for (long double v : q[j]) norm += v * v;
        r[j][j] = std::sqrt(norm);
        if (!(r[j][j] > 1e-14L)) throw ValidationError("asymptotic fit: samples do not separate the basis");
        for (auto& v : q[j]) v /= r[j][j];
    }
    std::array<long double, 4> b{};
    for (int j = 0; j < 4; ++j) {
        for (std::size_t i = 0; i < m; ++i) b[j] += q[j][i] * y[i];
    }
    std::array<long double, 4> x{};
    for (int j = 3; j >= 0; --j) {
        long double s = b[j];
        for (int k = j + 1; k < 4; ++k) s -= r[j][k] * x[k];
        x[j] = s / r[j][j];
    }
    return {static_cast<double>(x[0] / scale[0]), static_cast<double>(x[1] / scale[1]),
            static_cast<double>(x[2] / scale[2]), static_cast<double>(x[3] / scale[3])};
}

LineFit fit_log_slope(std::span<const double> t, std::span<const double> y) {
    if (t.size() < 6) return fit_line(t, y);
    const AsymptoticFit f = fit_log_asymptotic(t, y);
    return {f.slope, f.intercept};
}

}  // namespace mflab
