#include <doctest.h>

#include "check_near.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "canon/coverings.hpp"
#include "canon/error.hpp"

using namespace canon;
using std::numbers::pi;

namespace {

SequenceSpec quarter_turns() { return SequenceSpec::arithmetic_step(0.0, SequenceSpec::constant(pi / 2)); }

SequenceSpec hq_lengths(int q, double alpha, double beta) {
    return make_block(q, BlockIndexing::residue, {{0, SequenceSpec::power(beta, 2 * beta, 1.0, 1.0)}},
                      SequenceSpec::power(alpha, 2 * alpha, 1.0, 1.0));
}

DiagonalProjection alternating_units(int n) {
    std::vector<double> l(static_cast<std::size_t>(n), 1.0);
    std::vector<int> t;
    for (int i = 0; i < n; ++i) t.push_back(1 + i % 2);
    return diagonal_projections(l, t);
}

// Minimum cost with at most k parts, k = 1 .. N, over every subset of inner cut nodes.
std::vector<double> brute_force(const DiagonalProjection& p) {
    const int N = static_cast<int>(p.size());
    std::vector<double> best(static_cast<std::size_t>(N), INFINITY);
    for (unsigned mask = 0; mask < (1u << (N - 1)); ++mask) {
        double cost = 0.0;
        int parts = 0, from = 0;
        for (int n = 1; n <= N; ++n)
            if (n == N || (mask >> (n - 1) & 1u)) {
                cost += std::sqrt(p.measure(1, from, n) * p.measure(2, from, n));
                ++parts;
                from = n;
            }
        best[static_cast<std::size_t>(parts - 1)] = std::min(best[static_cast<std::size_t>(parts - 1)], cost);
    }
    for (std::size_t k = 1; k < best.size(); ++k) best[k] = std::min(best[k], best[k - 1]);
    return best;
}

}  // namespace

TEST_CASE("diagonal projections") {
    FiniteRankHamiltonian h{{1, 1, 1, 1}, {0, pi / 2, pi, 3 * pi / 2}};
    auto p = diagonal_projections(h);
    CHECK(p.tags == std::vector<int>{1, 2, 1, 2});
    CHECK(p.measure(1, 0, 4) == 2.0);
    CHECK(p.measure(2, 0, 4) == 2.0);
    CHECK(p.measure(1, 0, 4) + p.measure(2, 0, 4) == p.nodes.back());

    auto hq = diagonal_projections(HamburgerHamiltonian{hq_lengths(2, 2.0, 4.0), quarter_turns()}, 50);
    for (Index n = 0; n < hq.size(); ++n) CHECK(hq.tags[static_cast<std::size_t>(n)] == 1 + n % 2);

    HamburgerHamiltonian tilted{SequenceSpec::power(2.0), SequenceSpec::arithmetic_step(0.0, SequenceSpec::power(0.5))};
    try {
        diagonal_projections(tilted, 10);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::inapplicable);
    }
}

TEST_CASE("covering costs on four alternating unit intervals") {
    auto p = alternating_units(4);
    auto whole = covering_cost(p, Covering{{{0.0, 4.0}}});
    CHECK(whole.count == 1);
    CHECK(whole.cost == 2.0);
    auto singles = covering_cost(p, NodeCovering{{{0, 1}, {1, 2}, {2, 3}, {3, 4}}});
    CHECK(singles.count == 4);
    CHECK(singles.cost == 0.0);
    CHECK(covering_cost(p, NodeCovering{{{0, 2}, {2, 4}}}).cost == doctest::Approx(2.0));

    CHECK_THROWS_AS(covering_cost(p, Covering{{{0.0, 1.5}, {1.5, 4.0}}}), Error);
    CHECK(unaligned_cost(p, Covering{{{0.0, 1.5}, {1.5, 4.0}}}).cost ==
          doctest::Approx(std::sqrt(1.0 * 0.5) + std::sqrt(1.0 * 1.5)));
    CHECK_THROWS_AS(validate(p, Covering{{{0.0, 1.0}, {1.5, 4.0}}}), Error);
    CHECK_THROWS_AS(validate(p, Covering{{{0.0, 3.0}}}), Error);
    CHECK_THROWS_AS(validate(p, NodeCovering{{{0, 2}, {1, 4}}}), Error);
}

TEST_CASE("node refinement") {
    auto p = alternating_units(4);
    auto r = refine_to_nodes(p, Covering{{{0.5, 2.5}, {0.0, 0.5}, {2.5, 4.0}}});
    CHECK(r.parts == std::vector<std::pair<Index, Index>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}});

    // Single intervals come back unchanged; a two-interval part splits at its inner node.
    Covering as_points{{{0.0, 1.0}, {1.0, 2.0}, {2.0, 4.0}}};
    CHECK(refine_to_nodes(p, as_points).parts == std::vector<std::pair<Index, Index>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    Covering singles{{{0.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}, {3.0, 4.0}}};
    CHECK(covering_cost(p, refine_to_nodes(p, singles)).cost == covering_cost(p, singles).cost);

    // A longer aligned part loses its end intervals to singletons.
    auto six = alternating_units(6);
    CHECK(refine_to_nodes(six, Covering{{{0.0, 6.0}}}).parts ==
          std::vector<std::pair<Index, Index>>{{0, 1}, {1, 5}, {5, 6}});

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int N = 5 + static_cast<int>(u(rng) * 30);
        std::vector<double> l;
        std::vector<int> t;
        for (int i = 0; i < N; ++i) {
            l.push_back(0.05 + u(rng));
            t.push_back(u(rng) < 0.5 ? 1 : 2);
        }
        auto q = diagonal_projections(l, t);
        const double L = q.nodes.back();
        std::vector<double> cuts;
        const int m = static_cast<int>(u(rng) * 8);
        for (int i = 0; i < m; ++i) {
            // Some cuts land on nodes.
            cuts.push_back(u(rng) < 0.3 ? q.nodes[static_cast<std::size_t>(1 + u(rng) * (N - 1))] : u(rng) * L);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        Covering c;
        double at = 0.0;
        for (double x : cuts)
            if (x > at && x < L) {
                c.parts.emplace_back(at, x);
                at = x;
            }
        c.parts.emplace_back(at, L);
        auto refined = refine_to_nodes(q, c);
        validate(q, refined);
        const auto before = unaligned_cost(q, c);
        const auto after = covering_cost(q, refined);
        CHECK(after.cost <= before.cost + 1e-12);
        CHECK(after.count <= 4 * before.count);
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("optimal covering small cases") {
    auto p = alternating_units(4);
    CHECK(optimal_covering(p, 4).cost == 0.0);
    CHECK(optimal_covering(p, 1).cost == 2.0);
    CHECK(optimal_covering(p, 1).covering.parts == std::vector<std::pair<Index, Index>>{{0, 4}});
    CHECK(optimal_covering(p, 100).covering.parts.size() == 4);
    CHECK_THROWS_AS(optimal_covering(p, 0), Error);

    // Equal-tag runs merge before the cap applies.
    std::vector<double> l(5000, 1.0);
    std::vector<int> t(5000, 1);
    t[4999] = 2;
    CHECK(optimal_covering(diagonal_projections(l, t), 2).cost == 0.0);
    try {
        optimal_covering(alternating_units(50), 3, 40);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::cap_exceeded);
    }
}

TEST_CASE("optimal covering matches exhaustive search for N <= 12") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    long patterns = 0;
    for (int N = 1; N <= 12; ++N)
        for (unsigned tags = 0; tags < (1u << N); ++tags) {
            std::vector<double> l;
            std::vector<int> t;
            for (int i = 0; i < N; ++i) {
                l.push_back(u(rng));
                t.push_back(1 + static_cast<int>(tags >> i & 1u));
            }
            auto p = diagonal_projections(l, t);
            const auto oracle = brute_force(p);
            const auto curve = optimal_cost_curve(p, N);
            bool ok = curve.size() == oracle.size();
            for (std::size_t k = 0; ok && k < curve.size(); ++k) {
                ok = std::fabs(curve[k] - oracle[k]) <= 1e-12 * (1.0 + oracle[k]);
                if (k > 0) ok = ok && curve[k] <= curve[k - 1];
            }
            for (Index K = 1; ok && K <= N; K += 3) {
                auto best = optimal_covering(p, K);
                const auto c = covering_cost(p, best.covering);
                ok = c.count <= K && std::fabs(c.cost - oracle[static_cast<std::size_t>(K - 1)]) <= 1e-12 * (1.0 + c.cost);
            }
            if (!ok) FAIL_CHECK("mismatch at N = " << N << ", tags = " << tags);
            ++patterns;
        }
    CHECK(patterns == 8190);
}

TEST_CASE("covering hull on a small projection agrees with the exact curve") {
    // Finite part: 12 alternating intervals; the tail beyond node 12 carries mass in both sets.
    std::vector<double> l, S1, S2;
    std::vector<int> t;
    for (int i = 0; i < 12; ++i) {
        l.push_back(1.0 / ((i + 1) * (i + 1)));
        t.push_back(1 + i % 2);
    }
    const double r1 = 0.01, r2 = 0.02;
    double a = r1, b = r2;
    S1.assign(13, 0.0);
    S2.assign(13, 0.0);
    for (int n = 12; n >= 0; --n) {
        S1[static_cast<std::size_t>(n)] = a;
        S2[static_cast<std::size_t>(n)] = b;
        if (n > 0) (t[static_cast<std::size_t>(n - 1)] == 1 ? a : b) += l[static_cast<std::size_t>(n - 1)];
    }
    std::vector<double> mus;
    for (int k = 0; k < 60; ++k) mus.push_back(std::pow(10.0, -0.1 * k));
    const auto hull = covering_hull(S1, S2, mus, 12);
    REQUIRE(hull.size() >= 3);
    // Exhaustive minimum with the last part running to infinity.
    for (const auto& [K, cost] : hull) {
        double best = INFINITY;
        for (unsigned mask = 0; mask < (1u << 12); ++mask) {
            if (__builtin_popcount(mask) + 1 != K) continue;
            double c = 0.0;
            int from = 0;
            for (int n = 1; n <= 12; ++n)
                if (mask >> (n - 1) & 1u) {
                    c += std::sqrt((S1[static_cast<std::size_t>(from)] - S1[static_cast<std::size_t>(n)]) *
                                   (S2[static_cast<std::size_t>(from)] - S2[static_cast<std::size_t>(n)]));
                    from = n;
                }
            c += std::sqrt(S1[static_cast<std::size_t>(from)] * S2[static_cast<std::size_t>(from)]);
            best = std::min(best, c);
        }
        CHECK(cost == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("order from coverings on closed-form diagonal families") {
    auto h2 = order_from_coverings({hq_lengths(2, 2.0, 4.0), quarter_turns()});
    auto h3 = order_from_coverings({hq_lengths(3, 2.0, 4.0), quarter_turns()});
    auto mono = order_from_coverings({SequenceSpec::power(2.0), quarter_turns()});
    CHECK_NEAR(h2.d_hat, 1.0 / 3, 0.05);
    CHECK_NEAR(h3.d_hat, 0.5, 0.05);
    CHECK_NEAR(mono.d_hat, 0.5, 0.05);
    CHECK(h3.d_hat - h2.d_hat >= 0.1);
    for (const auto* o : {&h2, &h3, &mono}) {
        CHECK(o->d_low <= o->d_hat);
        CHECK(o->d_hat <= o->d_high);
        CHECK(o->curve.size() == 8);
        for (std::size_t k = 1; k < o->hull.size(); ++k) CHECK(o->hull[k].second <= o->hull[k - 1].second);
    }
    const auto csv = covering_curve_csv(h2.curve);
    CHECK(csv.rfind("R,count,cost\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);

    HamburgerHamiltonian tilted{SequenceSpec::power(2.0), SequenceSpec::arithmetic_step(0.0, SequenceSpec::power(0.5))};
    CoveringConfig small;
    small.cut_positions = 1000;
    CHECK_THROWS_AS(order_from_coverings(tilted, small), Error);
    small.grid_points = 4;
    CHECK_THROWS_AS(order_from_coverings({SequenceSpec::power(2.0), quarter_turns()}, small), Error);
}

TEST_CASE("covering JSON") {
    NodeCovering c{{{0, 3}, {3, 7}}};
    CHECK(to_json(c).dump() == "[[0,3],[3,7]]");
    CHECK(node_covering_from_json(to_json(c)).parts == c.parts);
    CHECK_THROWS_AS(node_covering_from_json(nlohmann::json::parse("[[0,1,2]]")), Error);

    CoveringConfig cfg;
    cfg.window = 5;
    CHECK(covering_config_from_json(to_json(cfg)).window == 5);
    CHECK_THROWS_AS(covering_config_from_json(nlohmann::json::parse(R"({"windw": 3})")), Error);
}
