#include "mflab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mflab/errors.hpp"
#include "mflab/transport.hpp"

namespace mflab {

Barycenter::Barycenter(std::vector<WeightedPoint> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ValidationError("barycenter needs at least one atom");
    double total = 0.0;
    for (auto& a : atoms_) {
        if (!(a.weight > 0.0)) throw ValidationError("barycenter weights must be positive");
        a.point = {wrap_unit(a.point.x), wrap_unit(a.point.y)};
        total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("barycenter weights must sum to 1");
}

DensityMeasure::DensityMeasure(TorusGrid grid, std::vector<double> weights)
    : grid_(grid), weights_(std::move(weights)) {
    if (weights_.size() != grid_.size()) throw ValidationError("density size does not match grid");
    long double total = 0.0L;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw ValidationError("density weights must be nonnegative");
        total += w;
    }
    if (std::abs(static_cast<double>(total) - 1.0) > 1e-12) {
        throw ValidationError("density weights must sum to 1");
    }
}

DensityMeasure DensityMeasure::from_exponential(const TorusField& u, const TorusField& h) {
    if (!(u.grid() == h.grid())) throw ValidationError("field grids differ");
    const double shift = u.max();
    std::vector<double> w(u.size());
    long double total = 0.0L;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(h[i] > 0.0)) throw ValidationError("density weight function must be positive");
        w[i] = h[i] * std::exp(u[i] - shift);
        total += w[i];
    }
    for (double& x : w) x = static_cast<double>(x / total);
    return DensityMeasure(u.grid(), std::move(w));
}

DensityMeasure DensityMeasure::from_field(const TorusField& f) {
    long double total = 0.0L;
    for (double v : f.values()) {
        if (!(v >= 0.0)) throw ValidationError("density field must be nonnegative");
        total += v;
    }
    if (!(total > 0.0L)) throw ValidationError("density field has zero mass");
    std::vector<double> w(f.values().begin(), f.values().end());
    for (double& x : w) x = static_cast<double>(x / total);
    return DensityMeasure(f.grid(), std::move(w));
}

namespace {

int coarse_side(const TorusGrid& grid, int max_side) {
    if (max_side < 1) throw ValidationError("coarse grid side must be positive");
    int side = grid.n();
    while (side > max_side) side /= 2;
    return side;
}

}  // namespace

std::vector<WeightedPoint> downsample(const DensityMeasure& mu, int max_side) {
    const auto& grid = mu.grid();
    const int n = grid.n();
    const int side = coarse_side(grid, max_side);
    const int f = n / side;
    std::vector<double> mass(static_cast<std::size_t>(side) * side, 0.0);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            mass[static_cast<std::size_t>(iy / f) * side + ix / f] += mu.weights()[grid.index(ix, iy)];
        }
    }
    std::vector<WeightedPoint> out;
    out.reserve(mass.size());
    const double offset = 0.5 * (f - 1);
    for (int by = 0; by < side; ++by) {
        for (int bx = 0; bx < side; ++bx) {
            out.push_back({{(bx * f + offset) / n, (by * f + offset) / n},
                           mass[static_cast<std::size_t>(by) * side + bx]});
        }
    }
    return out;
}

double downsample_error_bound(const TorusGrid& grid, int max_side) {
    const int f = grid.n() / coarse_side(grid, max_side);
    return std::sqrt(2.0) * 0.5 * (f - 1) / grid.n();
}

double wasserstein1(std::span<const WeightedPoint> mu, std::span<const WeightedPoint> nu) {
    std::vector<WeightedPoint> src;
    std::vector<WeightedPoint> dst;
    for (const auto& p : mu) {
        if (p.weight > 0.0) src.push_back(p);
    }
    for (const auto& p : nu) {
        if (p.weight > 0.0) dst.push_back(p);
    }
    double ms = 0.0;
    double md = 0.0;
    for (const auto& p : src) ms += p.weight;
    for (const auto& p : dst) md += p.weight;
    if (std::abs(ms - md) > 1e-8) throw MassMismatchError("measures have different total mass");
    if (src.empty()) return 0.0;

    std::vector<double> supply(src.size());
    std::vector<double> demand(dst.size());
    std::vector<double> cost(src.size() * dst.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        supply[i] = src[i].weight;
        for (std::size_t j = 0; j < dst.size(); ++j) {
            cost[i * dst.size() + j] = torus_distance(src[i].point, dst[j].point);
        }
    }
    for (std::size_t j = 0; j < dst.size(); ++j) demand[j] = dst[j].weight;
    return solve_transport(supply, demand, cost).cost;
}

KrDistance kr_distance(const DensityMeasure& mu, const Barycenter& nu, int max_side) {
    const auto coarse = downsample(mu, max_side);
    return {wasserstein1(coarse, nu.atoms()), downsample_error_bound(mu.grid(), max_side)};
}

namespace {

// Cost of sending every coarse atom to its nearest center; equals the
// distance to the best barycenter supported on `centers`.
double nearest_cost(std::span<const WeightedPoint> pts, const std::vector<TorusPoint>& centers) {
    long double total = 0.0L;
    for (const auto& p : pts) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) best = std::min(best, torus_distance(p.point, c));
        total += p.weight * best;
    }
    return static_cast<double>(total);
}

std::vector<std::size_t> seed_maxima(std::span<const WeightedPoint> pts, int side, int k) {
    auto at = [&](int bx, int by) {
        bx = (bx % side + side) % side;
        by = (by % side + side) % side;
        return pts[static_cast<std::size_t>(by) * side + bx].weight;
    };
    std::vector<std::size_t> maxima;
    for (int by = 0; by < side; ++by) {
        for (int bx = 0; bx < side; ++bx) {
            const double w = at(bx, by);
            if (w <= 0.0) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if ((dx || dy) && at(bx + dx, by + dy) > w) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) maxima.push_back(static_cast<std::size_t>(by) * side + bx);
        }
    }
    auto heavier = [&](std::size_t a, std::size_t b) {
        return pts[a].weight != pts[b].weight ? pts[a].weight > pts[b].weight : a < b;
    };
    std::sort(maxima.begin(), maxima.end(), heavier);

    // Plateaus produce adjacent maxima; keep one per neighborhood.
    std::vector<std::size_t> seeds;
    const double cell = 1.0 / side;
    for (std::size_t idx : maxima) {
        bool close = false;
        for (std::size_t s : seeds) close |= torus_distance(pts[idx].point, pts[s].point) < 1.5 * cell;
        if (!close) seeds.push_back(idx);
        if (static_cast<int>(seeds.size()) == k) return seeds;
    }
    std::vector<std::size_t> rest(pts.size());
    std::iota(rest.begin(), rest.end(), 0);
    std::sort(rest.begin(), rest.end(), heavier);
    for (std::size_t idx : rest) {
        if (static_cast<int>(seeds.size()) == k) break;
        if (std::find(seeds.begin(), seeds.end(), idx) == seeds.end()) seeds.push_back(idx);
    }
    return seeds;
}

}  // namespace

BarycenterFit dist_to_barycenters(const DensityMeasure& mu, int k, int max_side) {
    if (k < 1 || k > 4) throw ValidationError("barycenter atom count k must be in 1..4");
    const auto pts = downsample(mu, max_side);
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(pts.size()))));

    std::vector<TorusPoint> centers;
    for (std::size_t idx : seed_maxima(pts, side, k)) centers.push_back(pts[idx].point);

    double value = nearest_cost(pts, centers);
    const double floor_step = 0.25 / mu.grid().n();
    constexpr TorusPoint moves[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    for (double step = 1.0 / side; step >= floor_step; step *= 0.5) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (auto& c : centers) {
                for (const auto& mv : moves) {
                    const TorusPoint saved = c;
                    c = {wrap_unit(c.x + step * mv.x), wrap_unit(c.y + step * mv.y)};
                    const double trial = nearest_cost(pts, centers);
                    if (trial < value - 1e-15) {
                        value = trial;
                        improved = true;
                    } else {
                        c = saved;
                    }
                }
            }
        }
    }

    // Voronoi masses are the optimal weights for fixed atom positions.
    std::vector<double> mass(centers.size(), 0.0);
    for (const auto& p : pts) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < centers.size(); ++j) {
            if (torus_distance(p.point, centers[j]) < torus_distance(p.point, centers[best])) best = j;
        }
        mass[best] += p.weight;
    }
    std::vector<WeightedPoint> atoms;
    double total = 0.0;
    for (std::size_t j = 0; j < centers.size(); ++j) {
        if (mass[j] > 0.0) {
            atoms.push_back({centers[j], mass[j]});
            total += mass[j];
        }
    }
    for (auto& a : atoms) a.weight /= total;
    Barycenter bary(std::move(atoms));
    const double dist = wasserstein1(pts, bary.atoms());
    return {dist, std::move(bary)};
}

}  // namespace mflab
