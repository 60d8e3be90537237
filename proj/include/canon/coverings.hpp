#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "canon/hamiltonian.hpp"

namespace canon {

// Intervals [x_n, x_{n+1}) of a diagonal Hamiltonian split into E1 (angle 0 mod pi) and
// E2 (angle pi/2 mod pi), with prefix sums of both measures over the nodes x_0 .. x_N.
struct DiagonalProjection {
    std::vector<int> tags;       // 1 or 2 per interval
    std::vector<double> nodes;   // x_0 .. x_N
    std::vector<double> m1, m2;  // lambda([0, x_n) cap M_i), n = 0 .. N

    Index size() const noexcept { return static_cast<Index>(tags.size()); }
    double measure(int which, Index from, Index to) const;  // lambda([x_from, x_to) cap M_which)
};

DiagonalProjection diagonal_projections(const FiniteRankHamiltonian& h);
DiagonalProjection diagonal_projections(const HamburgerHamiltonian& h, Index N);
// Tags given directly (1 or 2) with their lengths.
DiagonalProjection diagonal_projections(const std::vector<double>& lengths, const std::vector<int>& tags);

// A covering of [0, x_N) by half-open intervals with arbitrary endpoints, in any order.
struct Covering {
    std::vector<std::pair<double, double>> parts;
};

// A covering whose parts are [x_a, x_b) for node indices a < b.
struct NodeCovering {
    std::vector<std::pair<Index, Index>> parts;
};

struct CoveringCost {
    Index count = 0;
    double cost = 0.0;  // sum of sqrt(lambda(w cap E1) lambda(w cap E2))
};

CoveringCost covering_cost(const DiagonalProjection& p, const NodeCovering& c);
// Endpoints must coincide with nodes (relative 1e-12), otherwise a precondition error.
CoveringCost covering_cost(const DiagonalProjection& p, const Covering& c);
// Cost of a covering with arbitrary endpoints, measuring partial intervals.
CoveringCost unaligned_cost(const DiagonalProjection& p, const Covering& c);

// Parts must be disjoint, half-open, ordered and cover [0, x_N) exactly.
void validate(const DiagonalProjection& p, const Covering& c);
void validate(const DiagonalProjection& p, const NodeCovering& c);

// Node-aligned refinement: a part inside one interval [x_n, x_{n+1}) becomes that interval;
// otherwise, with x_{n-} and x_{n+} its first and last inner nodes, it becomes [x_{n- - 1}, x_{n-}),
// [x_{n-}, x_{n+}) (when n- < n+) and [x_{n+}, x_{n+ + 1}). Coincident pieces are kept once.
NodeCovering refine_to_nodes(const DiagonalProjection& p, const Covering& c);

struct OptimalCovering {
    NodeCovering covering;
    double cost = 0.0;
};

inline constexpr Index default_dp_cap = 4000;

// Exact minimum of the cost over node-aligned coverings of [0, x_N) with at most K parts.
// Runs of equal tags are merged first (cuts inside a run never help); the cap applies to the
// merged size.
OptimalCovering optimal_covering(const DiagonalProjection& p, Index K, Index cap = default_dp_cap);
// Minimum cost with at most k parts for every k = 1 .. K (entry k - 1).
std::vector<double> optimal_cost_curve(const DiagonalProjection& p, Index K, Index cap = default_dp_cap);

struct CoveringConfig {
    Index cut_positions = 1'000'000;  // nodes available for cuts; the last part may run to x_infinity
    Index extent_factor = 4;          // tail masses summed to extent_factor * cut_positions, then continued
    Index window = 8;                 // at most this many merged runs per finite part
    int multipliers = 77;             // Lagrange multipliers, geometric over [1e-40, 1e-2]
    double k_min = 1e3, k_max = 1e5;  // count range of the fit
    int grid_points = 8;              // R-grid points reported at the estimate
    double slope_tolerance = 0.05;
    double d_min = 0.05, d_max = 1.0;
};

struct CoveringPoint {
    double R = 0.0;
    double count = 0.0;
    double cost = 0.0;
};

struct CoveringOrder {
    double d_hat = 0.0;
    double d_low = 0.0, d_high = 0.0;  // estimates with the cost slope moved by -/+ tolerance
    double gamma = 0.0;                // cost ~ count^-gamma (times a log factor)
    double log_term = 0.0;
    std::vector<std::pair<Index, double>> hull;  // (count, minimal cost) from the multiplier sweep
    std::vector<CoveringPoint> curve;            // (R, count = R^d_hat, cost) over the R-grid
    std::vector<std::string> warnings;
};

// Tail masses of E1 and E2 from node n onwards, n = 0 .. cut_positions.
std::pair<std::vector<double>, std::vector<double>> tail_masses(const HamburgerHamiltonian& h, Index cut_positions,
                                                                Index extent_factor);

// Lagrangian hull of the cost curve: for each multiplier mu, the covering minimizing cost + mu count
// among coverings whose finite parts span at most `window` merged runs and whose last part runs to
// x_infinity. Entries are (count, cost), increasing in count.
std::vector<std::pair<Index, double>> covering_hull(const std::vector<double>& S1, const std::vector<double>& S2,
                                                    const std::vector<double>& multipliers, Index window);

CoveringOrder order_from_coverings(const HamburgerHamiltonian& h, const CoveringConfig& cfg = {});

std::string covering_curve_csv(const std::vector<CoveringPoint>& curve);

nlohmann::json to_json(const NodeCovering& c);
NodeCovering node_covering_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CoveringOrder& o);
nlohmann::json to_json(const CoveringConfig& c);
CoveringConfig covering_config_from_json(const nlohmann::json& j);

}  // namespace canon
