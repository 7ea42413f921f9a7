#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace mflab {

/// A point of the flat unit torus [0,1)^2.
struct TorusPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Wraps a coordinate into [0, 1).
double wrap_unit(double t) noexcept;

/// Geodesic distance on the flat unit torus (minimum over integer shifts).
double torus_distance(TorusPoint p, TorusPoint q) noexcept;

/// Uniform n x n periodic grid on the unit torus; every cell has area 1/n^2.
class TorusGrid {
public:
    explicit TorusGrid(int n);

    int n() const noexcept { return n_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }
    double spacing() const noexcept { return 1.0 / n_; }
    double cell_area() const noexcept { return 1.0 / (static_cast<double>(n_) * n_); }

    std::size_t index(int ix, int iy) const noexcept {
        return static_cast<std::size_t>(iy) * n_ + ix;
    }
    TorusPoint point(int ix, int iy) const noexcept { return {ix * spacing(), iy * spacing()}; }
    TorusPoint point(std::size_t idx) const noexcept {
        return point(static_cast<int>(idx % n_), static_cast<int>(idx / n_));
    }

    friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

private:
    int n_;
};

/// Scalar field sampled on a TorusGrid. Storage is row-major with x fastest:
/// value(ix, iy) = values[iy * n + ix].
class TorusField {
public:
    explicit TorusField(TorusGrid grid);
    TorusField(TorusGrid grid, std::vector<double> values);

    static TorusField constant(TorusGrid grid, double c);
    static TorusField sample(TorusGrid grid, const std::function<double(TorusPoint)>& f);

    const TorusGrid& grid() const noexcept { return grid_; }
    int n() const noexcept { return grid_.n(); }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    double& operator()(int ix, int iy) noexcept { return values_[grid_.index(ix, iy)]; }
    double operator()(int ix, int iy) const noexcept { return values_[grid_.index(ix, iy)]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// Area-weighted integral over the torus (equals the grid mean).
    double integral() const noexcept;
    double max() const noexcept;
    double min() const noexcept;
    double sup_norm() const noexcept;

    /// Copy with the mean subtracted.
    TorusField mean_zero() const;

    TorusField& operator+=(const TorusField& other);
    TorusField& operator-=(const TorusField& other);
    TorusField& operator*=(double s) noexcept;

    friend TorusField operator+(TorusField a, const TorusField& b) { return a += b; }
    friend TorusField operator-(TorusField a, const TorusField& b) { return a -= b; }
    friend TorusField operator*(double s, TorusField a) { return a *= s; }
    friend TorusField operator*(TorusField a, double s) { return a *= s; }

private:
    TorusGrid grid_;
    std::vector<double> values_;
};

/// Area-weighted L2 inner product.
double inner(const TorusField& a, const TorusField& b);

/// Solves -Lap u = f for mean-zero f; the zero mode of u is set to 0.
/// Throws NonZeroMeanError if |mean(f)| > 1e-10.
TorusField poisson_solve(const TorusField& f);

/// Spectral Laplacian with symbol -(2 pi)^2 |k|^2 on every resolved mode.
TorusField laplacian(const TorusField& u);

/// Spectral gradient; the Nyquist modes are dropped.
std::array<TorusField, 2> gradient(const TorusField& u);

/// (1/2) int |grad u|^2 in Parseval form, consistent with laplacian().
double dirichlet_energy(const TorusField& u);

/// log int h e^{scale u}, max-shifted. Requires h > 0 and scale in (0, 1].
double log_mean_exp(const TorusField& u, const TorusField& h, double scale);

/// Trigonometric interpolation onto a finer grid (new_n a multiple of n).
TorusField prolong(const TorusField& u, int new_n);

void write_field_binary(const std::filesystem::path& path, const TorusField& u);
TorusField read_field_binary(const std::filesystem::path& path);
void write_field_csv(const std::filesystem::path& path, const TorusField& u);

}  // namespace mflab
