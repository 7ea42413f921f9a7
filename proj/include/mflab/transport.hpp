#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mflab {

struct TransportFlow {
    std::size_t source = 0;
    std::size_t sink = 0;
    double amount = 0.0;
};

struct TransportPlan {
    double cost = 0.0;
    std::vector<TransportFlow> flows;  // basic cells with positive flow
    int pivots = 0;
};

/// Exact balanced transportation problem by the network simplex method on
/// the bipartite source/sink graph (spanning-tree bases, Dantzig pricing
/// with a Bland fallback under degeneracy).
///
/// `cost` is row-major, supply.size() x demand.size(). The totals of
/// supply and demand must agree to 1e-8 relative; the residual is absorbed
/// into the last sink.
TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              std::span<const double> cost);

}  // namespace mflab
