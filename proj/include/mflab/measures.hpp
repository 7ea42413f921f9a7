#pragma once

#include <span>
#include <vector>

#include "mflab/torus_field.hpp"

namespace mflab {

struct WeightedPoint {
    TorusPoint point;
    double weight = 0.0;
};

/// Probability measure with finitely many atoms, an element of the k-th
/// formal barycenter set for k = atom count.
class Barycenter {
public:
    explicit Barycenter(std::vector<WeightedPoint> atoms);

    const std::vector<WeightedPoint>& atoms() const noexcept { return atoms_; }
    int k() const noexcept { return static_cast<int>(atoms_.size()); }

private:
    std::vector<WeightedPoint> atoms_;
};

/// Nonnegative grid weights of unit total mass.
class DensityMeasure {
public:
    DensityMeasure(TorusGrid grid, std::vector<double> weights);

    /// h e^{u} / sum(h e^{u}), max-shifted.
    static DensityMeasure from_exponential(const TorusField& u, const TorusField& h);
    /// Normalizes an arbitrary nonnegative field.
    static DensityMeasure from_field(const TorusField& f);

    const TorusGrid& grid() const noexcept { return grid_; }
    std::span<const double> weights() const noexcept { return weights_; }

private:
    TorusGrid grid_;
    std::vector<double> weights_;
};

/// Block-summed copy of a density on a coarse grid of at most max_side
/// cells per side. Coarse atoms sit at the centroid of their fine cells.
std::vector<WeightedPoint> downsample(const DensityMeasure& mu, int max_side);

/// Largest torus distance from a fine grid point to its coarse centroid.
double downsample_error_bound(const TorusGrid& grid, int max_side);

/// Exact Wasserstein-1 distance between two discrete measures with the
/// torus geodesic ground metric.
double wasserstein1(std::span<const WeightedPoint> mu, std::span<const WeightedPoint> nu);

struct KrDistance {
    double distance = 0.0;
    double downsample_bound = 0.0;  // |reported - exact| <= this
};

/// Kantorovich-Rubinstein distance between a grid density and a barycenter,
/// computed on a coarse grid of at most max_side x max_side cells.
KrDistance kr_distance(const DensityMeasure& mu, const Barycenter& nu, int max_side = 32);

struct BarycenterFit {
    double distance = 0.0;
    Barycenter barycenter;
};

/// Upper bound on the distance from mu to the set of barycenters with at
/// most k atoms (k in 1..4): seeded at the k heaviest local maxima of the
/// coarse density, then refined by pattern search on atom positions with
/// Voronoi-optimal weights.
BarycenterFit dist_to_barycenters(const DensityMeasure& mu, int k, int max_side = 32);

}  // namespace mflab
