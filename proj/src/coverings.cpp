#include "canon/coverings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "canon/error.hpp"
#include "canon/fit.hpp"

namespace canon {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

int tag_of(double phi, Index n) {
    if (std::fabs(std::sin(phi)) < 1e-9) return 1;
    if (std::fabs(std::cos(phi)) < 1e-9) return 2;
    fail(ErrorKind::inapplicable, "Hamiltonian is not diagonal: angle " + std::to_string(phi) + " at n = " +
                                      std::to_string(n) + " is not a multiple of pi/2");
}

double piece(double a1, double a2) { return std::sqrt(std::max(0.0, a1) * std::max(0.0, a2)); }

// Run boundaries: node indices where the tag changes, plus 0 and N.
std::vector<Index> run_boundaries(const std::vector<int>& tags) {
    std::vector<Index> b{0};
    const auto N = static_cast<Index>(tags.size());
    for (Index n = 1; n < N; ++n)
        if (tags[static_cast<std::size_t>(n)] != tags[static_cast<std::size_t>(n - 1)]) b.push_back(n);
    if (N > 0) b.push_back(N);
    return b;
}

bool same_point(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)}); }

// Node index of x, or -1 when x is not a node.
Index node_index(const DiagonalProjection& p, double x) {
    auto it = std::lower_bound(p.nodes.begin(), p.nodes.end(), x);
    if (it != p.nodes.end() && same_point(*it, x)) return it - p.nodes.begin();
    if (it != p.nodes.begin() && same_point(*(it - 1), x)) return it - 1 - p.nodes.begin();
    return -1;
}

// lambda([0, x) cap M_which) for arbitrary x in [0, x_N].
double measure_to(const DiagonalProjection& p, int which, double x) {
    const auto& m = which == 1 ? p.m1 : p.m2;
    auto it = std::upper_bound(p.nodes.begin(), p.nodes.end(), x);
    const Index n = std::max<Index>(0, (it - p.nodes.begin()) - 1);
    double v = m[static_cast<std::size_t>(n)];
    if (n < p.size() && p.tags[static_cast<std::size_t>(n)] == which) v += x - p.nodes[static_cast<std::size_t>(n)];
    return v;
}

}  // namespace

double DiagonalProjection::measure(int which, Index from, Index to) const {
    const auto& m = which == 1 ? m1 : m2;
    return m[static_cast<std::size_t>(to)] - m[static_cast<std::size_t>(from)];
}

DiagonalProjection diagonal_projections(const std::vector<double>& lengths, const std::vector<int>& tags) {
    if (lengths.size() != tags.size()) fail(ErrorKind::precondition, "lengths and tags differ in size");
    DiagonalProjection p;
    p.tags = tags;
    p.nodes.assign(1, 0.0);
    p.m1.assign(1, 0.0);
    p.m2.assign(1, 0.0);
    long double x = 0.0L, a = 0.0L, b = 0.0L;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        if (!(lengths[i] > 0.0)) fail(ErrorKind::invalid_hamiltonian, "length " + std::to_string(i + 1) + " is not positive");
        if (tags[i] != 1 && tags[i] != 2) fail(ErrorKind::precondition, "tags must be 1 or 2");
        x += lengths[i];
        (tags[i] == 1 ? a : b) += lengths[i];
        p.nodes.push_back(static_cast<double>(x));
        p.m1.push_back(static_cast<double>(a));
        p.m2.push_back(static_cast<double>(b));
    }
    return p;
}

DiagonalProjection diagonal_projections(const FiniteRankHamiltonian& h) {
    std::vector<int> tags;
    for (std::size_t i = 0; i < h.size(); ++i) tags.push_back(tag_of(h.angles[i], static_cast<Index>(i + 1)));
    return diagonal_projections(h.lengths, tags);
}

DiagonalProjection diagonal_projections(const HamburgerHamiltonian& h, Index N) {
    return diagonal_projections(truncate(h, N));
}

void validate(const DiagonalProjection& p, const Covering& c) {
    if (c.parts.empty()) fail(ErrorKind::precondition, "empty covering");
    auto parts = c.parts;
    std::sort(parts.begin(), parts.end());
    double at = 0.0;
    for (const auto& [a, b] : parts) {
        if (!same_point(a, at)) fail(ErrorKind::precondition, "covering parts are not contiguous at " + std::to_string(at));
        if (!(b > a)) fail(ErrorKind::precondition, "covering part is empty or reversed");
        at = b;
    }
    if (!same_point(at, p.nodes.back())) fail(ErrorKind::precondition, "covering does not end at x_N");
}

void validate(const DiagonalProjection& p, const NodeCovering& c) {
    if (c.parts.empty()) fail(ErrorKind::precondition, "empty covering");
    Index at = 0;
    for (const auto& [a, b] : c.parts) {
        if (a != at || b <= a) fail(ErrorKind::precondition, "node covering parts must be contiguous and nonempty");
        at = b;
    }
    if (at != p.size()) fail(ErrorKind::precondition, "node covering does not end at node N");
}

CoveringCost covering_cost(const DiagonalProjection& p, const NodeCovering& c) {
    validate(p, c);
    CoveringCost out;
    out.count = static_cast<Index>(c.parts.size());
    for (const auto& [a, b] : c.parts) out.cost += piece(p.measure(1, a, b), p.measure(2, a, b));
    return out;
}

CoveringCost covering_cost(const DiagonalProjection& p, const Covering& c) {
    validate(p, c);
    NodeCovering nc;
    for (const auto& [a, b] : c.parts) {
        const Index i = node_index(p, a), j = node_index(p, b);
        if (i < 0 || j < 0) fail(ErrorKind::precondition, "covering is not node-aligned; refine it to nodes first");
        nc.parts.emplace_back(i, j);
    }
    return covering_cost(p, nc);
}

CoveringCost unaligned_cost(const DiagonalProjection& p, const Covering& c) {
    validate(p, c);
    CoveringCost out;
    out.count = static_cast<Index>(c.parts.size());
    for (const auto& [a, b] : c.parts)
        out.cost += piece(measure_to(p, 1, b) - measure_to(p, 1, a), measure_to(p, 2, b) - measure_to(p, 2, a));
    return out;
}

NodeCovering refine_to_nodes(const DiagonalProjection& p, const Covering& c) {
    validate(p, c);
    std::vector<std::pair<Index, Index>> pieces;
    for (const auto& [a, b] : c.parts) {
        // Inner nodes: a < x_n < b.
        auto lo = std::upper_bound(p.nodes.begin(), p.nodes.end(), a);
        auto hi = std::lower_bound(p.nodes.begin(), p.nodes.end(), b);
        while (lo != hi && same_point(*lo, a)) ++lo;
        while (hi != lo && same_point(*(hi - 1), b)) --hi;
        if (lo == hi) {
            const auto n = static_cast<Index>(std::upper_bound(p.nodes.begin(), p.nodes.end(), a) - p.nodes.begin()) - 1;
            const Index s = node_index(p, a) >= 0 ? node_index(p, a) : n;
            pieces.emplace_back(s, s + 1);
            continue;
        }
        const auto nm = static_cast<Index>(lo - p.nodes.begin());
        const auto np = static_cast<Index>(hi - p.nodes.begin()) - 1;
        pieces.emplace_back(nm - 1, nm);
        if (nm < np) pieces.emplace_back(nm, np);
        pieces.emplace_back(np, np + 1);
    }
    std::sort(pieces.begin(), pieces.end());
    pieces.erase(std::unique(pieces.begin(), pieces.end()), pieces.end());
    NodeCovering out{pieces};
    validate(p, out);
    return out;
}

namespace {

struct RunDp {
    std::vector<Index> bounds;                // run boundaries in node indices
    std::vector<std::vector<double>> best;    // best[k][j]: k+1 parts covering runs [0, j)
    std::vector<std::vector<Index>> from;
};

RunDp run_dp(const DiagonalProjection& p, Index K, Index cap) {
    if (K < 1) fail(ErrorKind::precondition, "K must be at least 1");
    RunDp dp;
    dp.bounds = run_boundaries(p.tags);
    const auto R = static_cast<Index>(dp.bounds.size()) - 1;
    if (R < 1) fail(ErrorKind::precondition, "empty projection");
    if (R > cap)
        fail(ErrorKind::cap_exceeded, std::to_string(R) + " runs of equal tags exceed the DP cap of " +
                                          std::to_string(cap) + "; coarsen the Hamiltonian or raise the cap");
    const Index kmax = std::min(K, R);
    auto cost = [&](Index i, Index j) {
        const Index a = dp.bounds[static_cast<std::size_t>(i)], b = dp.bounds[static_cast<std::size_t>(j)];
        return piece(p.measure(1, a, b), p.measure(2, a, b));
    };
    dp.best.assign(static_cast<std::size_t>(kmax), std::vector<double>(static_cast<std::size_t>(R + 1), inf));
    dp.from.assign(static_cast<std::size_t>(kmax), std::vector<Index>(static_cast<std::size_t>(R + 1), -1));
    for (Index j = 1; j <= R; ++j) dp.best[0][static_cast<std::size_t>(j)] = cost(0, j);
    for (Index k = 1; k < kmax; ++k) {
        auto& cur = dp.best[static_cast<std::size_t>(k)];
        const auto& prev = dp.best[static_cast<std::size_t>(k - 1)];
        for (Index j = k + 1; j <= R; ++j)
            for (Index i = k; i < j; ++i) {
                const double v = prev[static_cast<std::size_t>(i)] + cost(i, j);
                if (v < cur[static_cast<std::size_t>(j)]) {
                    cur[static_cast<std::size_t>(j)] = v;
                    dp.from[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = i;
                }
            }
    }
    return dp;
}

}  // namespace

std::vector<double> optimal_cost_curve(const DiagonalProjection& p, Index K, Index cap) {
    const auto dp = run_dp(p, K, cap);
    const auto R = dp.bounds.size() - 1;
    std::vector<double> out;
    double best = inf;
    for (Index k = 0; k < K; ++k) {
        if (k < static_cast<Index>(dp.best.size())) best = std::min(best, dp.best[static_cast<std::size_t>(k)][R]);
        out.push_back(best);
    }
    return out;
}

OptimalCovering optimal_covering(const DiagonalProjection& p, Index K, Index cap) {
    const auto dp = run_dp(p, K, cap);
    const auto R = static_cast<Index>(dp.bounds.size()) - 1;
    Index k_best = 0;
    for (Index k = 1; k < static_cast<Index>(dp.best.size()); ++k)
        if (dp.best[static_cast<std::size_t>(k)][static_cast<std::size_t>(R)] <
            dp.best[static_cast<std::size_t>(k_best)][static_cast<std::size_t>(R)])
            k_best = k;
    OptimalCovering out;
    out.cost = dp.best[static_cast<std::size_t>(k_best)][static_cast<std::size_t>(R)];
    std::vector<std::pair<Index, Index>> parts;
    Index j = R;
    for (Index k = k_best; k >= 0; --k) {
        const Index i = k == 0 ? 0 : dp.from[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        parts.emplace_back(dp.bounds[static_cast<std::size_t>(i)], dp.bounds[static_cast<std::size_t>(j)]);
        j = i;
    }
    std::reverse(parts.begin(), parts.end());
    out.covering.parts = parts;
    return out;
}

std::pair<std::vector<double>, std::vector<double>> tail_masses(const HamburgerHamiltonian& h, Index cut_positions,
                                                                Index extent_factor) {
    const Index M = std::max(cut_positions, extent_factor * cut_positions);
    const auto l = h.lengths.materialize(1, M);
    AngleCursor ac(h.angles);
    std::vector<int> tags(static_cast<std::size_t>(M));
    for (Index n = 1; n <= M; ++n) tags[static_cast<std::size_t>(n - 1)] = tag_of(ac.advance_to(n), n);
    // Beyond M the remaining length is split in the proportions of the last octave.
    long double a = 0.0L, b = 0.0L;
    for (Index n = M / 2 + 1; n <= M; ++n) (tags[static_cast<std::size_t>(n - 1)] == 1 ? a : b) += l[static_cast<std::size_t>(n - 1)];
    long double r1 = 0.0L, r2 = 0.0L;
    if (auto t = length_tail(h, M); t && t->is_finite() && a + b > 0) {
        r1 = t->value() * a / (a + b);
        r2 = t->value() * b / (a + b);
    } else if (!t) {
        const auto c = classify_limit(h, M, 1e-10);
        if (c.kind == LimitKind::limit_point) fail(ErrorKind::inapplicable, "coverings need a limit circle Hamiltonian");
    } else if (t->is_infinite()) {
        fail(ErrorKind::inapplicable, "coverings need a limit circle Hamiltonian");
    }
    for (Index n = M; n > cut_positions; --n)
        (tags[static_cast<std::size_t>(n - 1)] == 1 ? r1 : r2) += l[static_cast<std::size_t>(n - 1)];
    std::vector<double> S1(static_cast<std::size_t>(cut_positions + 1)), S2(S1.size());
    for (Index n = cut_positions; n >= 0; --n) {
        S1[static_cast<std::size_t>(n)] = static_cast<double>(r1);
        S2[static_cast<std::size_t>(n)] = static_cast<double>(r2);
        if (n > 0) (tags[static_cast<std::size_t>(n - 1)] == 1 ? r1 : r2) += l[static_cast<std::size_t>(n - 1)];
    }
    return {S1, S2};
}

std::vector<std::pair<Index, double>> covering_hull(const std::vector<double>& S1, const std::vector<double>& S2,
                                                    const std::vector<double>& multipliers, Index window) {
    const auto N = static_cast<Index>(S1.size()) - 1;
    std::vector<double> g(static_cast<std::size_t>(N + 1));
    std::vector<Index> cnt(g.size());
    std::map<Index, double> hull;
    for (double mu : multipliers) {
        g[0] = 0.0;
        cnt[0] = 0;
        for (Index j = 1; j <= N; ++j) {
            double best = inf;
            Index bc = 0;
            const double s1 = S1[static_cast<std::size_t>(j)], s2 = S2[static_cast<std::size_t>(j)];
            for (Index i = std::max<Index>(0, j - window); i < j; ++i) {
                const double v = g[static_cast<std::size_t>(i)] +
                                 piece(S1[static_cast<std::size_t>(i)] - s1, S2[static_cast<std::size_t>(i)] - s2) + mu;
                if (v < best) {
                    best = v;
                    bc = cnt[static_cast<std::size_t>(i)] + 1;
                }
            }
            g[static_cast<std::size_t>(j)] = best;
            cnt[static_cast<std::size_t>(j)] = bc;
        }
        // The last part runs from some node to x_infinity.
        double best = inf;
        Index bc = 0;
        for (Index i = 0; i <= N; ++i) {
            const double v = g[static_cast<std::size_t>(i)] + piece(S1[static_cast<std::size_t>(i)], S2[static_cast<std::size_t>(i)]) + mu;
            if (v < best) {
                best = v;
                bc = cnt[static_cast<std::size_t>(i)] + 1;
            }
        }
        const double cost = best - static_cast<double>(bc) * mu;
        auto it = hull.find(bc);
        if (it == hull.end() || cost < it->second) hull[bc] = cost;
    }
    return {hull.begin(), hull.end()};
}

namespace {

struct CurveModel {
    double gamma = 0.0, log_term = 0.0, intercept = 0.0;
    double at(double K) const { return -gamma * std::log(K) + log_term * std::log(std::log(K)) + intercept; }
};

// Cost slope against ln R along count = R^d, fitted on the R-grid R_k = K_k^{1/d}.
double cost_slope(const CurveModel& m, double d, double k_min, double k_max, int points) {
    std::vector<double> x, y;
    for (int k = 0; k < points; ++k) {
        const double K = k_min * std::pow(k_max / k_min, static_cast<double>(k) / (points - 1));
        x.push_back(std::log(K) / d);
        y.push_back(m.at(K));
    }
    return fit_slope(x, y, true).slope;
}

}  // namespace

CoveringOrder order_from_coverings(const HamburgerHamiltonian& h, const CoveringConfig& cfg) {
    if (cfg.grid_points < 6) fail(ErrorKind::precondition, "covering order needs at least 6 grid points");
    if (!(cfg.k_max > cfg.k_min && cfg.k_min >= 2)) fail(ErrorKind::precondition, "invalid count range");
    const auto [S1full, S2full] = tail_masses(h, cfg.cut_positions, cfg.extent_factor);
    // Cuts inside runs of equal tags never lower the cost: keep run boundaries only.
    std::vector<double> S1{S1full[0]}, S2{S2full[0]};
    for (Index n = 1; n < cfg.cut_positions; ++n) {
        const auto u = static_cast<std::size_t>(n);
        const bool t1_before = S1full[u - 1] > S1full[u];
        const bool t1_after = S1full[u] > S1full[u + 1];
        if (t1_before != t1_after) {
            S1.push_back(S1full[u]);
            S2.push_back(S2full[u]);
        }
    }
    S1.push_back(S1full.back());
    S2.push_back(S2full.back());

    std::vector<double> mus;
    for (int k = 0; k < cfg.multipliers; ++k)
        mus.push_back(std::pow(10.0, -2.0 - 38.0 * k / std::max(1, cfg.multipliers - 1)));
    CoveringOrder out;
    out.hull = covering_hull(S1, S2, mus, cfg.window);

    std::vector<double> lk, llk, one, y;
    for (const auto& [K, c] : out.hull)
        if (static_cast<double>(K) >= cfg.k_min && static_cast<double>(K) <= cfg.k_max && c > 0.0) {
            lk.push_back(std::log(static_cast<double>(K)));
            llk.push_back(std::log(lk.back()));
            one.push_back(1.0);
            y.push_back(std::log(c));
        }
    if (y.size() < 5)
        fail(ErrorKind::insufficient_data, "only " + std::to_string(y.size()) +
                                               " hull points in the count range; the multiplier grid is too short");
    const auto fit = least_squares({lk, llk, one}, y);
    CurveModel m{-fit.coef[0], fit.coef[1], fit.coef[2]};
    out.gamma = m.gamma;
    out.log_term = m.log_term;

    // Smallest d with cost slope <= d - 1 + shift; count grows like R^d by construction.
    auto solve = [&](double shift) {
        auto feasible = [&](double d) {
            return cost_slope(m, d, cfg.k_min, cfg.k_max, cfg.grid_points) <= d - 1.0 + shift;
        };
        if (feasible(cfg.d_min)) return cfg.d_min;
        if (!feasible(cfg.d_max)) return cfg.d_max;
        double lo = cfg.d_min, hi = cfg.d_max;
        for (int it = 0; it < 60; ++it) {
            const double mid = (lo + hi) / 2;
            (feasible(mid) ? hi : lo) = mid;
        }
        return hi;
    };
    out.d_hat = solve(0.0);
    out.d_low = solve(cfg.slope_tolerance);
    out.d_high = solve(-cfg.slope_tolerance);
    if (out.d_hat <= cfg.d_min) out.warnings.push_back("estimate at the lower end of the search interval");
    if (out.d_hat >= cfg.d_max) out.warnings.push_back("no d in the search interval is feasible");

    for (int k = 0; k < cfg.grid_points; ++k) {
        const double K = cfg.k_min * std::pow(cfg.k_max / cfg.k_min, static_cast<double>(k) / (cfg.grid_points - 1));
        // Largest hull count not above K: its minimal cost bounds the cost with at most K parts.
        const std::pair<Index, double>* at = nullptr;
        for (const auto& pt : out.hull)
            if (static_cast<double>(pt.first) <= K) at = &pt;
        if (!at) continue;
        out.curve.push_back({std::exp(std::log(K) / out.d_hat), static_cast<double>(at->first), at->second});
    }
    if (std::fabs(m.log_term) > 10.0) out.warnings.push_back("large logarithmic term in the cost fit");
    return out;
}

std::string covering_curve_csv(const std::vector<CoveringPoint>& curve) {
    std::ostringstream os;
    os.precision(17);
    os << "R,count,cost\n";
    for (const auto& p : curve) os << p.R << ',' << p.count << ',' << p.cost << '\n';
    return os.str();
}

nlohmann::json to_json(const NodeCovering& c) {
    auto j = nlohmann::json::array();
    for (const auto& [a, b] : c.parts) j.push_back({a, b});
    return j;
}

NodeCovering node_covering_from_json(const nlohmann::json& j) {
    if (!j.is_array()) fail(ErrorKind::parse, "covering must be a list of node-index pairs");
    NodeCovering c;
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2) fail(ErrorKind::parse, "covering part must be a pair [from, to]");
        c.parts.emplace_back(p[0].get<Index>(), p[1].get<Index>());
    }
    return c;
}

nlohmann::json to_json(const CoveringOrder& o) {
    auto hull = nlohmann::json::array();
    for (const auto& [k, c] : o.hull) hull.push_back({k, c});
    auto curve = nlohmann::json::array();
    for (const auto& p : o.curve) curve.push_back({{"R", p.R}, {"count", p.count}, {"cost", p.cost}});
    return {{"dHat", o.d_hat}, {"dInterval", {o.d_low, o.d_high}}, {"gamma", o.gamma}, {"logTerm", o.log_term},
            {"hull", hull},    {"curve", curve},                     {"warnings", o.warnings}};
}

nlohmann::json to_json(const CoveringConfig& c) {
    return {{"cut_positions", c.cut_positions}, {"extent_factor", c.extent_factor}, {"window", c.window},
            {"multipliers", c.multipliers},     {"k_min", c.k_min},                 {"k_max", c.k_max},
            {"grid_points", c.grid_points},     {"slope_tolerance", c.slope_tolerance},
            {"d_min", c.d_min},                 {"d_max", c.d_max}};
}

CoveringConfig covering_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorKind::parse, "covering config must be an object");
    CoveringConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "cut_positions") c.cut_positions = v.get<Index>();
        else if (key == "extent_factor") c.extent_factor = v.get<Index>();
        else if (key == "window") c.window = v.get<Index>();
        else if (key == "multipliers") c.multipliers = v.get<int>();
        else if (key == "k_min") c.k_min = v.get<double>();
        else if (key == "k_max") c.k_max = v.get<double>();
        else if (key == "grid_points") c.grid_points = v.get<int>();
        else if (key == "slope_tolerance") c.slope_tolerance = v.get<double>();
        else if (key == "d_min") c.d_min = v.get<double>();
        else if (key == "d_max") c.d_max = v.get<double>();
        else fail(ErrorKind::parse, "unknown covering config key '" + key + "'");
    }
    if (c.cut_positions < 16 || c.window < 1 || c.multipliers < 2)
        fail(ErrorKind::validation, "covering config values out of range");
    return c;
}

}  // namespace canon
