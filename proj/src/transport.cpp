#include "mflab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "mflab/errors.hpp"

namespace mflab {

namespace {

struct Cell {
    int source;
    int sink;
    double flow;
};

class TransportSimplex {
public:
    TransportSimplex(std::vector<double> supply, std::vector<double> demand, std::span<const double> cost)
        : m_(static_cast<int>(supply.size())),
          n_(static_cast<int>(demand.size())),
          cost_(cost),
          adj_(static_cast<std::size_t>(m_ + n_)),
          potential_(static_cast<std::size_t>(m_ + n_), 0.0) {
        double cmax = 0.0;
        for (double c : cost_) cmax = std::max(cmax, std::abs(c));
        tol_ = 1e-13 * (1.0 + cmax);
        northwest_corner(std::move(supply), std::move(demand));
    }

    TransportPlan run() {
        TransportPlan plan;
        int degenerate_run = 0;
        const long long max_pivots = 200LL * (m_ + n_) * std::max(1, std::min(m_, n_)) + 1000;
        for (long long pivot = 0;; ++pivot) {
            if (pivot > max_pivots) throw NumericalError("transport simplex exceeded its pivot budget");
            compute_potentials();
            const bool bland = degenerate_run > m_ + n_;
            auto [ei, ej] = price(bland);
            if (ei < 0) break;
            const double theta = pivot_on(ei, ej);
            degenerate_run = (theta == 0.0) ? degenerate_run + 1 : 0;
            ++plan.pivots;
        }
        long double total = 0.0L;
        for (const Cell& c : cells_) {
            if (c.flow > 0.0) {
                total += static_cast<long double>(c.flow) * cost(c.source, c.sink);
                plan.flows.push_back({static_cast<std::size_t>(c.source), static_cast<std::size_t>(c.sink), c.flow});
            }
        }
        plan.cost = static_cast<double>(total);
        return plan;
    }

private:
    double cost(int i, int j) const { return cost_[static_cast<std::size_t>(i) * n_ + j]; }
    int sink_node(int j) const { return m_ + j; }

    void add_cell(int i, int j, double flow) {
        const int id = static_cast<int>(cells_.size());
        cells_.push_back({i, j, flow});
        adj_[i].push_back(id);
        adj_[sink_node(j)].push_back(id);
    }

    void northwest_corner(std::vector<double> supply, std::vector<double> demand) {
        int i = 0;
        int j = 0;
        while (true) {
            const double x = std::max(0.0, std::min(supply[i], demand[j]));
            add_cell(i, j, x);
            supply[i] -= x;
            demand[j] -= x;
            if (i == m_ - 1 && j == n_ - 1) break;
            if (j == n_ - 1 || (i < m_ - 1 && supply[i] <= demand[j])) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    int other_end(const Cell& c, int node) const {
        return node < m_ ? sink_node(c.sink) : c.source;
    }

    void compute_potentials() {
        std::vector<char> seen(adj_.size(), 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        potential_[0] = 0.0;
        while (!q.empty()) {
            const int node = q.front();
            q.pop();
            for (int id : adj_[node]) {
                const Cell& c = cells_[id];
                const int next = other_end(c, node);
                if (seen[next]) continue;
                seen[next] = 1;
                // u_i + v_j = c_ij on every basic cell
                potential_[next] = cost(c.source, c.sink) - potential_[node];
                q.push(next);
            }
        }
    }

    std::pair<int, int> price(bool bland) const {
        double best = -tol_;
        std::pair<int, int> pick{-1, -1};
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_; ++j) {
                const double reduced = cost(i, j) - potential_[i] - potential_[sink_node(j)];
                if (reduced < best) {
                    best = reduced;
                    pick = {i, j};
                    if (bland) return pick;
                }
            }
        }
        return pick;
    }

    // Returns the cell ids on the tree path from `from` to `to`, ordered from `from`.
    std::vector<int> tree_path(int from, int to) const {
        std::vector<int> parent_cell(adj_.size(), -1);
        std::vector<char> seen(adj_.size(), 0);
        std::queue<int> q;
        q.push(to);
        seen[to] = 1;
        while (!q.empty()) {
            const int node = q.front();
            q.pop();
            if (node == from) break;
            for (int id : adj_[node]) {
                const int next = other_end(cells_[id], node);
                if (seen[next]) continue;
                seen[next] = 1;
                parent_cell[next] = id;
                q.push(next);
            }
        }
        std::vector<int> path;
        for (int node = from; node != to;) {
            const int id = parent_cell[node];
            if (id < 0) throw NumericalError("transport basis is not a spanning tree");
            path.push_back(id);
            node = other_end(cells_[id], node);
        }
        return path;
    }

    double pivot_on(int ei, int ej) {
        const std::vector<int> path = tree_path(ei, sink_node(ej));
        // Edges alternate -, +, -, ... starting at the source end; the path length is odd.
        double theta = std::numeric_limits<double>::infinity();
        int leaving = -1;
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const int id = path[k];
            if (cells_[id].flow < theta || (cells_[id].flow == theta && id < leaving)) {
                theta = cells_[id].flow;
                leaving = id;
            }
        }
        for (std::size_t k = 0; k < path.size(); ++k) {
            Cell& c = cells_[path[k]];
            c.flow = (k % 2 == 0) ? std::max(0.0, c.flow - theta) : c.flow + theta;
        }
        const Cell old = cells_[leaving];
        detach(leaving, old.source);
        detach(leaving, sink_node(old.sink));
        cells_[leaving] = {ei, ej, theta};
        adj_[ei].push_back(leaving);
        adj_[sink_node(ej)].push_back(leaving);
        return theta;
    }

    void detach(int id, int node) {
        auto& list = adj_[node];
        list.erase(std::find(list.begin(), list.end(), id));
    }

    int m_;
    int n_;
    std::span<const double> cost_;
    std::vector<Cell> cells_;
    std::vector<std::vector<int>> adj_;
    std::vector<double> potential_;
    double tol_ = 0.0;
};

}  // namespace

TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              std::span<const double> cost) {
    if (supply.empty() || demand.empty()) throw ValidationError("transport needs sources and sinks");
    if (cost.size() != supply.size() * demand.size()) {
        throw ValidationError("transport cost matrix has the wrong size");
    }
    for (double s : supply) {
        if (!(s >= 0.0)) throw ValidationError("transport supplies must be nonnegative");
    }
    for (double d : demand) {
        if (!(d >= 0.0)) throw ValidationError("transport demands must be nonnegative");
    }
    const double ts = std::accumulate(supply.begin(), supply.end(), 0.0);
    const double td = std::accumulate(demand.begin(), demand.end(), 0.0);
    if (std::abs(ts - td) > 1e-8 * std::max(1.0, ts)) {
        throw MassMismatchError("transport supply and demand totals differ");
    }
    std::vector<double> dem(demand.begin(), demand.end());
    dem.back() = std::max(0.0, dem.back() + (ts - td));
    TransportSimplex simplex(std::vector<double>(supply.begin(), supply.end()), std::move(dem), cost);
    return simplex.run();
}

}  // namespace mflab
