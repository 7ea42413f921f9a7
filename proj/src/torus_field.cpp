#include "mflab/torus_field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>

#include "mflab/errors.hpp"

namespace mflab {

double wrap_unit(double t) noexcept {
    double w = t - std::floor(t);
    return w >= 1.0 ? 0.0 : w;
}

double torus_distance(TorusPoint p, TorusPoint q) noexcept {
    double dx = std::abs(wrap_unit(p.x) - wrap_unit(q.x));
    double dy = std::abs(wrap_unit(p.y) - wrap_unit(q.y));
    dx = std::min(dx, 1.0 - dx);
    dy = std::min(dy, 1.0 - dy);
    return std::hypot(dx, dy);
}

TorusGrid::TorusGrid(int n) : n_(n) {
    if (n < 16 || (n & (n - 1)) != 0) {
        throw ValidationError("torus grid resolution must be a power of two >= 16, got " +
                              std::to_string(n));
    }
}

TorusField::TorusField(TorusGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}

TorusField::TorusField(TorusGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ValidationError("field value count does not match grid size");
    }
}

TorusField TorusField::constant(TorusGrid grid, double c) {
    return TorusField(grid, std::vector<double>(grid.size(), c));
}

TorusField TorusField::sample(TorusGrid grid, const std::function<double(TorusPoint)>& f) {
    TorusField out(grid);
    for (int iy = 0; iy < grid.n(); ++iy) {
        for (int ix = 0; ix < grid.n(); ++ix) out(ix, iy) = f(grid.point(ix, iy));
    }
    return out;
}

double TorusField::integral() const noexcept {
    long double s = 0.0L;
    for (double v : values_) s += v;
    return static_cast<double>(s / static_cast<long double>(values_.size()));
}

double TorusField::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }
double TorusField::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }

double TorusField::sup_norm() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

TorusField TorusField::mean_zero() const {
    TorusField out = *this;
    const double m = integral();
    for (double& v : out.values_) v -= m;
    return out;
}

TorusField& TorusField::operator+=(const TorusField& other) {
    if (!(grid_ == other.grid_)) throw ValidationError("field grids differ");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

TorusField& TorusField::operator-=(const TorusField& other) {
    if (!(grid_ == other.grid_)) throw ValidationError("field grids differ");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

TorusField& TorusField::operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
}

double inner(const TorusField& a, const TorusField& b) {
    if (!(a.grid() == b.grid())) throw ValidationError("field grids differ");
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(s / static_cast<long double>(a.size()));
}

namespace {

using cplx = std::complex<double>;

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

/// Half spectrum of a real n x n field: n rows (ky) by n/2+1 columns (kx).
struct Spectrum {
    int n = 0;
    std::vector<cplx> data;

    int cols() const noexcept { return n / 2 + 1; }
    cplx& at(int row, int col) noexcept { return data[static_cast<std::size_t>(row) * cols() + col]; }
    int ky(int row) const noexcept { return row <= n / 2 ? row : row - n; }
};

Spectrum forward(const TorusField& u) {
    const int n = u.n();
    Spectrum s{n, std::vector<cplx>(static_cast<std::size_t>(n) * (n / 2 + 1))};
    std::vector<double> in(u.values().begin(), u.values().end());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_2d(n, n, in.data(), reinterpret_cast<fftw_complex*>(s.data.data()),
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return s;
}

TorusField inverse(Spectrum s, TorusGrid grid) {
    const int n = s.n;
    std::vector<double> out(grid.size());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_c2r_2d(n, n, reinterpret_cast<fftw_complex*>(s.data.data()), out.data(),
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (double& v : out) v *= scale;
    return TorusField(grid, std::move(out));
}

constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace

TorusField poisson_solve(const TorusField& f) {
    const double mean = f.integral();
    if (std::abs(mean) > 1e-10) {
        throw NonZeroMeanError("poisson_solve requires a mean-zero right-hand side (mean = " +
                               std::to_string(mean) + ")");
    }
    Spectrum s = forward(f);
    for (int row = 0; row < s.n; ++row) {
        const double ky = s.ky(row);
        for (int col = 0; col < s.cols(); ++col) {
            const double k2 = two_pi * two_pi * (ky * ky + static_cast<double>(col) * col);
            s.at(row, col) = (k2 == 0.0) ? cplx{} : s.at(row, col) / k2;
        }
    }
    return inverse(std::move(s), f.grid());
}

TorusField laplacian(const TorusField& u) {
    Spectrum s = forward(u);
    for (int row = 0; row < s.n; ++row) {
        const double ky = s.ky(row);
        for (int col = 0; col < s.cols(); ++col) {
            s.at(row, col) *= -two_pi * two_pi * (ky * ky + static_cast<double>(col) * col);
        }
    }
    return inverse(std::move(s), u.grid());
}

std::array<TorusField, 2> gradient(const TorusField& u) {
    const Spectrum base = forward(u);
    Spectrum sx = base;
    Spectrum sy = base;
    const int n = base.n;
    for (int row = 0; row < n; ++row) {
        const double ky = (row == n / 2) ? 0.0 : sx.ky(row);
        for (int col = 0; col < sx.cols(); ++col) {
            const double kx = (col == n / 2) ? 0.0 : col;
            sx.at(row, col) *= cplx{0.0, two_pi * kx};
            sy.at(row, col) *= cplx{0.0, two_pi * ky};
        }
    }
    return {inverse(std::move(sx), u.grid()), inverse(std::move(sy), u.grid())};
}

double dirichlet_energy(const TorusField& u) {
    Spectrum s = forward(u);
    const int n = s.n;
    const long double norm = 1.0L / (static_cast<long double>(n) * n);
    long double total = 0.0L;
    for (int row = 0; row < n; ++row) {
        const double ky = s.ky(row);
        for (int col = 0; col < s.cols(); ++col) {
            // interior columns stand for a conjugate pair
            const long double mult = (col == 0 || col == n / 2) ? 1.0L : 2.0L;
            const long double k2 = ky * ky + static_cast<double>(col) * col;
            const long double c = std::abs(s.at(row, col)) * norm;
            total += mult * k2 * c * c;
        }
    }
    return static_cast<double>(0.5L * two_pi * two_pi * total);
}

double log_mean_exp(const TorusField& u, const TorusField& h, double scale) {
    if (!(u.grid() == h.grid())) throw ValidationError("field grids differ");
    if (!(scale > 0.0 && scale <= 1.0)) throw ValidationError("log_mean_exp scale must lie in (0, 1]");
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(h[i] > 0.0)) throw ValidationError("log_mean_exp weight must be positive");
        shift = std::max(shift, scale * u[i] + std::log(h[i]));
    }
    long double s = 0.0L;
    for (std::size_t i = 0; i < u.size(); ++i) {
        s += h[i] * std::exp(scale * u[i] - shift);
    }
    return shift + static_cast<double>(std::log(s / static_cast<long double>(u.size())));
}

TorusField prolong(const TorusField& u, int new_n) {
    const int n = u.n();
    if (new_n < n || new_n % n != 0) throw ValidationError("prolong target must be a multiple of n");
    TorusGrid fine_grid(new_n);
    if (new_n == n) return u;

    Spectrum coarse = forward(u);
    Spectrum fine{new_n, std::vector<cplx>(static_cast<std::size_t>(new_n) * (new_n / 2 + 1))};
    const double gain = static_cast<double>(new_n) * new_n / (static_cast<double>(n) * n);
    const int half = n / 2;
    for (int row = 0; row < n; ++row) {
        const int ky = coarse.ky(row);
        for (int col = 0; col <= half; ++col) {
            const cplx c = coarse.at(row, col) * gain;
            // Nyquist modes of the coarse grid split evenly between +-n/2.
            std::vector<int> kys = (row == half) ? std::vector<int>{half, -half} : std::vector<int>{ky};
            const double wy = (row == half) ? 0.5 : 1.0;
            for (int fy : kys) {
                const int frow = fy >= 0 ? fy : new_n + fy;
                if (col == half) {
                    // the -n/2 twin of this column is carried by Hermitian symmetry
                    fine.at(frow, col) += c * wy * 0.5;
                } else {
                    fine.at(frow, col) += c * wy;
                }
            }
        }
    }
    return inverse(std::move(fine), fine_grid);
}

void write_field_binary(const std::filesystem::path& path, const TorusField& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    const std::int64_t n = u.n();
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(u.values().data()),
             static_cast<std::streamsize>(u.size() * sizeof(double)));
    if (!os) throw Error("failed writing " + path.string());
}

TorusField read_field_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    std::int64_t n = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!is || n <= 0 || n > (1 << 15)) throw Error("bad field header in " + path.string());
    TorusGrid grid(static_cast<int>(n));
    std::vector<double> values(grid.size());
    is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!is) throw Error("truncated field file " + path.string());
    return TorusField(grid, std::move(values));
}

void write_field_csv(const std::filesystem::path& path, const TorusField& u) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << "ix,iy,x,y,value\n" << std::setprecision(17);
    const auto& g = u.grid();
    for (int iy = 0; iy < g.n(); ++iy) {
        for (int ix = 0; ix < g.n(); ++ix) {
            const auto p = g.point(ix, iy);
            os << ix << ',' << iy << ',' << p.x << ',' << p.y << ',' << u(ix, iy) << '\n';
        }
    }
}

}  // namespace mflab
