// One PASS/FAIL line per acceptance criterion. Criteria known to be unattainable as stated print
// FAIL with the reason and leave the exit code alone; any other failure makes it nonzero.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "canon/bounds.hpp"
#include "canon/coverings.hpp"
#include "canon/error.hpp"
#include "canon/examples.hpp"
#include "canon/indices.hpp"
#include "canon/monodromy.hpp"
#include "canon/recurrence.hpp"

using namespace canon;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::vector<std::string> failures;  // unexpected
    std::vector<std::string> known;     // documented as unattainable

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            failures.push_back(what);
        }
    }
    void known_fail(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (std::find(known.begin(), known.end(), what) == known.end()) known.push_back(what);
        }
    }
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// c1: order of the residue families from the monodromy and from coverings.
void residue_family_orders(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int q : {2, 3}) {
        auto f = hq(q, 2, 4);
        const double want = *f.expectation.find("rho")->value;
        const double rho = order_estimate(f.hamiltonian).rho_hat;
        const double d = order_from_coverings(f.hamiltonian).d_hat;
        o.detail << "H" << q << " rhoHat " << fmt(rho) << " dHat " << fmt(d) << "; ";
        o.check(std::fabs(rho - want) <= 0.05, "rhoHat of H" + std::to_string(q));
        o.check(std::fabs(d - rho) <= 0.07, "dHat against rhoHat on H" + std::to_string(q));
    }
    const double elapsed = seconds_since(t0);
    o.detail << "runtime " << fmt(elapsed, 3) << " s";
    o.check(elapsed <= 600.0, "runtime");
}

// c2: finite-horizon G of the residue-family lengths against ((q - 1) alpha + beta) / q.
void residue_family_G(Outcome& o) {
    for (auto [q, a, b] : {std::tuple{2, 2.0, 4.0}, {3, 2.0, 4.0}, {4, 1.5, 3.0}}) {
        const double want = ((q - 1) * a + b) / q;
        const double g = G_value(hq(q, a, b).hamiltonian.lengths, 100'000, 0.5);
        o.detail << "(" << q << "," << a << "," << b << ") G " << fmt(g) << " vs " << fmt(want) << "; ";
        o.known_fail(std::fabs(g - want) <= 0.05,
                     "the (ln n)^-2 factor of the lengths adds about 0.42 delta at n = 1e5");
    }
}

// c3: generic power-like orders and the order formula.
void power_like_orders(Outcome& o) {
    for (auto [a, b] : {std::pair{3.0, 1.0}, {2.0, 2.0}, {4.0, 0.5}}) {
        auto f = power_like(a, b);
        const double want = 1.0 / (a + b);
        const double rho = order_estimate(f.hamiltonian).rho_hat;
        const auto formula = order_formula_r24(hamiltonian_indices(f.hamiltonian, 100'000));
        o.detail << "(" << a << "," << b << ") rhoHat " << fmt(rho) << " formula "
                 << (formula.value ? fmt(*formula.value) : "none") << " case " << r24_case_name(formula.which) << "; ";
        o.check(std::fabs(rho - want) <= 0.03, "rhoHat of power_like");
        o.check(formula.value && *formula.value == want && formula.which == R24Case::A, "order formula case A");
    }
    const auto jump = order_formula_r24(hamiltonian_indices(jumping(2).hamiltonian, 100'000));
    o.detail << "jumping(2) formula " << (jump.value ? fmt(*jump.value) : "none") << " case "
             << r24_case_name(jump.which);
    o.check(jump.value && *jump.value == 0.5 && jump.which == R24Case::B, "order formula case B");
}

// c4: leading coefficients of the counterexample family stay strictly below its order.
void leading_gap(Outcome& o) {
    auto f = livcounter(0.5, 0.25);
    const Index n = 100'000;
    auto j = jacobi_from_hamiltonian(f.hamiltonian, n);
    auto rep = livsic_bounds({}, log_leading_coefficients(j, n), n);
    if (!rep.leading) {
        o.check(false, "no leading-coefficient estimate");
        return;
    }
    const double lead = leading_value(*rep.leading).corrected;
    const double rho = order_estimate(f.hamiltonian).rho_hat;
    o.detail << "leading " << fmt(lead) << " rhoHat " << fmt(rho) << " gap " << fmt(rho - lead);
    o.check(std::fabs(lead - 0.25) <= 0.05, "leading estimate");
    o.check(std::fabs(rho - 0.5) <= 0.05, "rhoHat");
    o.check(rho - lead >= 0.1, "gap");
}

JacobiParameters random_jacobi(std::mt19937_64& rng, Index n) {
    std::uniform_real_distribution<double> r(0.1, 10.0), q(-5.0, 5.0);
    JacobiParameters j;
    for (Index k = 0; k < n; ++k) {
        j.offdiag.push_back(r(rng));
        j.diag.push_back(q(rng));
    }
    return j;
}

// c5: H -> J -> H and J -> s -> J round trips with the leading-coefficient identities.
void round_trips(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> len(0.01, 2.0), step(0.1, pi - 0.1);
    std::uniform_int_distribution<int> size_h(2, 100), size_j(1, 30);
    double worst_h = 0.0, worst_j = 0.0, worst_lead = 0.0, min_product = INFINITY;
    for (int trial = 0; trial < 100; ++trial) {
        const int N = size_h(rng);
        FiniteRankHamiltonian h;
        double phi = 0.0;
        for (int n = 0; n < N; ++n) {
            h.lengths.push_back(len(rng));
            h.angles.push_back(phi);
            phi += step(rng);
        }
        auto back = hamiltonian_from_jacobi(jacobi_from_hamiltonian(h), N);
        for (int n = 0; n < N; ++n)
            worst_h = std::max(worst_h, std::fabs(back.lengths[n] - h.lengths[n]) / h.lengths[n]);
        for (int n = 0; n + 1 < N; ++n) {
            const double d0 = reduce_angle(h.angles[n + 1] - h.angles[n]);
            const double d1 = reduce_angle(back.angles[n + 1] - back.angles[n]);
            worst_h = std::max(worst_h, std::fabs(std::sin(d0 - d1)));
        }
    }
    for (int trial = 0; trial < 100; ++trial) {
        const Index N = size_j(rng);
        auto j = random_jacobi(rng, N);
        auto s = jacobi_to_moments(j, N);
        auto back = moments_to_jacobi(s);
        if (back.size() != N) {
            o.check(false, "moment inversion lost degrees");
            continue;
        }
        for (Index n = 0; n < N; ++n) {
            const double row = std::max({std::fabs(j.diag[n]), j.offdiag[n], n > 0 ? j.offdiag[n - 1] : 0.0});
            worst_j = std::max(worst_j, std::fabs(back.offdiag[n] - j.offdiag[n]) / j.offdiag[n]);
            worst_j = std::max(worst_j, std::fabs(back.diag[n] - j.diag[n]) / row);
        }
        // b_{n,n} = 1 / (sqrt(s_0) rho_1 ... rho_n), and b_{n,n} sqrt(s_{2n}) >= 1.
        auto t = polynomial_tables(j, N);
        double log_prod = -0.5 * std::log(j.mass);
        for (Index n = 1; n <= N; ++n) {
            log_prod -= std::log(j.offdiag[n - 1]);
            const auto b = t.coefficient(n, n);
            const double err = std::fabs(b.log_abs - log_prod) / std::max(1.0, std::fabs(log_prod));
            worst_lead = std::max(worst_lead, b.sign == 1 ? err : INFINITY);
        }
        min_product = std::min(min_product, leading_moment_product(s, t, N));
    }
    const double elapsed = seconds_since(t0);
    o.detail << "H->J->H " << fmt(worst_h, 3) << ", J->s->J " << fmt(worst_j, 3) << ", leading identity "
             << fmt(worst_lead, 3) << ", min b sqrt(s) " << fmt(min_product, 6) << ", runtime " << fmt(elapsed, 3)
             << " s";
    o.check(worst_h < 1e-8, "H->J->H");
    o.check(worst_j < 1e-8, "J->s->J");
    o.check(worst_lead < 1e-10, "leading coefficient identity");
    o.check(min_product >= 1.0 - 1e-10, "leading coefficient times moment");
    o.check(elapsed < 60.0, "runtime");
}

FiniteRankHamiltonian random_hamiltonian(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> len(1e-3, 1.0), step(0.05, pi - 0.05);
    FiniteRankHamiltonian h;
    double phi = 0.0;
    for (int k = 0; k < n; ++k) {
        h.lengths.push_back(len(rng));
        h.angles.push_back(phi);
        phi = std::fmod(phi + step(rng), pi);
    }
    return h;
}

// c6: det W = 1, W(conj z) = conj W(z), and agreement with the symbolic product.
void transfer_invariants(Outcome& o) {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> size(1, 10'000);
    std::uniform_real_distribution<double> log_mod(std::log(1e-3), std::log(1e6)), arg(-pi, pi);
    double worst_det = 0.0, worst_conj = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        auto h = random_hamiltonian(rng, size(rng));
        const Complex z = std::polar(std::exp(log_mod(rng)), arg(rng));
        auto w = monodromy(h, z);
        auto wc = monodromy(h, std::conj(z));
        worst_det = std::max(worst_det, w.det_relative_error());
        if (wc.log_scale() != w.log_scale()) {
            worst_conj = INFINITY;
            continue;
        }
        for (int i = 0; i < 4; ++i) worst_conj = std::max(worst_conj, std::abs(wc.entries()[i] - std::conj(w.entries()[i])));
    }
    double worst_poly = 0.0;
    for (int n = 1; n <= 12; ++n)
        for (int trial = 0; trial < 20; ++trial) {
            auto h = random_hamiltonian(rng, n);
            auto poly = monodromy_polynomials(h);
            const Complex z = std::polar(std::exp(std::uniform_real_distribution<double>(-3, 3)(rng)), arg(rng));
            auto w = monodromy(h, z).value();
            double scale = 1.0;
            for (const auto& e : w) scale = std::max(scale, std::abs(e));
            for (int e = 0; e < 4; ++e) {
                Complex v = 0.0;
                for (auto c = poly[e].rbegin(); c != poly[e].rend(); ++c) v = v * z + *c;
                worst_poly = std::max(worst_poly, std::abs(v - w[e]) / scale);
            }
        }
    o.detail << "det " << fmt(worst_det, 3) << ", conjugation " << fmt(worst_conj, 3) << ", symbolic "
             << fmt(worst_poly, 3);
    o.check(worst_det < 1e-10, "det W = 1");
    o.check(worst_conj < 1e-12, "conjugation symmetry");
    o.check(worst_poly < 1e-10, "symbolic product");
}

// c7: estimator chain, equality on monotone sequences, index inequalities, g identities.
void inequality_chain(Outcome& o) {
    const Index horizon = 100'000;
    struct Lengths {
        std::string name;
        SequenceSpec y;
        bool monotone;
    };
    const std::vector<Lengths> lengths{
        {"n^-2", SequenceSpec::power(2.0), true},
        {"n^-3.5", SequenceSpec::power(3.5), true},
        {"(n ln^2 n)^-2", SequenceSpec::power(2.0, 4.0, 1.0, 1.0), true},
        {"hq(2,2,4)", hq(2, 2, 4).hamiltonian.lengths, false},
        {"hq(3,2,4)", hq(3, 2, 4).hamiltonian.lengths, false},
        {"r36(2,1.5,0.5)", r36(2, 1.5, 0.5).hamiltonian.lengths, false},
    };
    double worst_gap = 0.0;
    for (const auto& l : lengths) {
        auto r = growth_exponents(l.y, 0.5, horizon);
        if (!r.converged) continue;
        const double s = r.delta_star_hat.value(), a = r.delta_avg_hat.value(), m = r.delta_liminf_hat.value();
        o.check(s <= a + 1e-9 && a <= m + 0.05, "estimator chain on " + l.name);
        if (l.monotone) {
            worst_gap = std::max(worst_gap, std::fabs(s - m));
            o.check(std::fabs(s - m) < 0.05, "monotone equality on " + l.name);
        }
    }
    o.detail << "monotone gap " << fmt(worst_gap, 3) << "; ";

    const std::vector<std::pair<std::string, Family>> families{
        {"power_like(3,1)", power_like(3, 1)}, {"power_like(2,2)", power_like(2, 2)},
        {"power_like(4,0.5)", power_like(4, 0.5)}, {"power_like(3,2)", power_like(3, 2)},
        {"jumping(2)", jumping(2)},           {"hq(2,2,4)", hq(2, 2, 4)},
        {"hq(3,2,4)", hq(3, 2, 4)},           {"hq(4,1.5,3)", hq(4, 1.5, 3)},
        {"livcounter(0.5,0.25)", livcounter(0.5, 0.25)},
    };
    int closed = 0;
    for (const auto& [name, f] : families) {
        auto idx = hamiltonian_indices(f.hamiltonian, horizon);
        if (!idx.Lambda.closed_form || !idx.Lambda_star.closed_form || !idx.Delta_phi.closed_form) continue;
        ++closed;
        const double lam = idx.Lambda.value.value(), lam_star = idx.Lambda_star.value.value();
        o.check(idx.Delta_phi.value.value() - 1.0 <= lam + 1e-12, "Delta_phi - 1 <= Lambda on " + name);
        if (name == "hq(2,2,4)") {
            o.known_fail(lam_star >= lam, "Lambda* >= Lambda fails on hq(2,2,4): Lambda = " + fmt(lam) +
                                              " at phi = 0, Lambda* = " + fmt(lam_star) +
                                              " since the angles do not converge");
        } else {
            o.check(lam_star >= lam, "Lambda* >= Lambda on " + name);
        }
    }
    o.detail << closed << " closed-form families; ";
    o.check(closed == static_cast<int>(families.size()), "closed-form indices on every family");

    std::mt19937_64 rng(84);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int points = 0;
    for (; points < 10'000;) {
        const double x = 1.0 + 3.0 * u(rng), y = 3.0 * u(rng), z = 4.0 * u(rng);
        if (!(y <= z + 1 && x - y + z > 0)) continue;
        ++points;
        const double g = g_value(x, y, z);
        const double direct = (1 - y + z / 2) / (x - y + z);
        bool ok = std::fabs(g - direct) <= 1e-14 * std::fabs(direct);
        const double lhs = (2 - x - y) * (y - z / 2);
        if (std::fabs(lhs) > 1e-9) ok = ok && ((1 / (x + y) <= g) == (lhs >= 0));
        if (2 - y >= 1) ok = ok && std::fabs(g_value(2 - y, y, z) - 0.5) <= 1e-14;
        ok = ok && ((g == 1.0) == (x == 1.0 && z == 0.0));
        if (!ok) {
            o.check(false, "g identities at (" + fmt(x) + ", " + fmt(y) + ", " + fmt(z) + ")");
            break;
        }
    }
    o.check(g_value(1.0, 0.0, 0.0) == 1.0 && g_value(1.5, 0.5, 0.8) == 0.5, "g at fixed points");
    o.detail << points << " domain points";
}

// c8: covering DP against exhaustive search, and the node refinement.
void covering_oracle(Outcome& o) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    long patterns = 0, mismatches = 0;
    for (int N = 1; N <= 12; ++N)
        for (unsigned mask = 0; mask < (1u << N); ++mask) {
            std::vector<double> l;
            std::vector<int> t;
            for (int i = 0; i < N; ++i) {
                l.push_back(0.1 + 1.9 * u(rng));
                t.push_back(1 + static_cast<int>(mask >> i & 1u));
            }
            auto p = diagonal_projections(l, t);
            std::vector<double> best(static_cast<std::size_t>(N), INFINITY);
            for (unsigned cuts = 0; cuts < (1u << (N - 1)); ++cuts) {
                double cost = 0.0;
                int parts = 0, from = 0;
                for (int n = 1; n <= N; ++n)
                    if (n == N || (cuts >> (n - 1) & 1u)) {
                        cost += std::sqrt(p.measure(1, from, n) * p.measure(2, from, n));
                        ++parts;
                        from = n;
                    }
                best[static_cast<std::size_t>(parts - 1)] = std::min(best[static_cast<std::size_t>(parts - 1)], cost);
            }
            for (std::size_t k = 1; k < best.size(); ++k) best[k] = std::min(best[k], best[k - 1]);
            for (Index K = 1; K <= N; ++K) {
                auto opt = optimal_covering(p, K);
                const auto c = covering_cost(p, opt.covering);
                const double want = best[static_cast<std::size_t>(K - 1)];
                if (c.count > K || std::fabs(c.cost - want) > 1e-12 * (1.0 + want) ||
                    std::fabs(opt.cost - want) > 1e-12 * (1.0 + want))
                    ++mismatches;
            }
            ++patterns;
        }
    o.detail << patterns << " tag patterns, " << mismatches << " mismatches; ";
    o.check(patterns == 8190 && mismatches == 0, "exhaustive equivalence");

    int worse = 0, over = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int N = 5 + static_cast<int>(u(rng) * 30);
        std::vector<double> l;
        std::vector<int> t;
        for (int i = 0; i < N; ++i) {
            l.push_back(0.05 + u(rng));
            t.push_back(u(rng) < 0.5 ? 1 : 2);
        }
        auto p = diagonal_projections(l, t);
        const double L = p.nodes.back();
        std::vector<double> cuts;
        const int m = static_cast<int>(u(rng) * 8);
        for (int i = 0; i < m; ++i)
            cuts.push_back(u(rng) < 0.3 ? p.nodes[static_cast<std::size_t>(1 + u(rng) * (N - 1))] : u(rng) * L);
        std::sort(cuts.begin(), cuts.end());
        Covering c;
        double at = 0.0;
        for (double x : cuts)
            if (x > at && x < L) {
                c.parts.emplace_back(at, x);
                at = x;
            }
        c.parts.emplace_back(at, L);
        auto refined = refine_to_nodes(p, c);
        validate(p, refined);
        const auto before = unaligned_cost(p, c);
        const auto after = covering_cost(p, refined);
        if (after.cost > before.cost + 1e-12) ++worse;
        if (after.count > 4 * before.count) ++over;
    }
    o.detail << "refinement: " << worse << " cost increases, " << over << " count overruns in 1000";
    o.check(worse == 0 && over == 0, "refinement");
}

// c9: certificate on power-like (3, 2) above and below the upper bound.
void certificate(Outcome& o) {
    auto h = power_like(3, 2).hamiltonian;
    auto idx = hamiltonian_indices(h, 100'000);
    if (!idx.limit_angle) {
        o.check(false, "no limit angle");
        return;
    }
    const double bound = upper_bound(idx).m2.value;
    auto s = plan_surrogates(h, idx, *idx.limit_angle);
    auto show = [&](const Certificate& c) {
        o.detail << "d = " << fmt(c.d, 3) << ": exponents " << fmt(c.e_i, 3) << " " << fmt(c.e_ii, 3) << " "
                 << fmt(c.e_iii, 3) << " " << fmt(c.e_iv, 3) << (c.pass ? " pass" : " fail") << "; ";
    };
    o.detail << "upper bound " << fmt(bound) << "; ";
    auto above = certify_m29(h, s, *idx.limit_angle, bound + 0.02);
    auto below = certify_m29(h, s, *idx.limit_angle, bound - 0.05);
    show(above);
    show(below);
    o.check(above.pass, "passes above the bound");
    o.check(!below.pass, "fails below the bound");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"c1 residue-family orders", residue_family_orders},
        {"c2 residue-family G values", residue_family_G},
        {"c3 power-like orders", power_like_orders},
        {"c4 leading-coefficient gap", leading_gap},
        {"c5 round trips", round_trips},
        {"c6 transfer-matrix invariants", transfer_invariants},
        {"c7 inequality chain", inequality_chain},
        {"c8 covering oracle", covering_oracle},
        {"c9 certificate", certificate},
    };
    int unexpected = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            run(o);
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::string line = (o.pass ? "PASS " : "FAIL ") + name + " [" + fmt(seconds_since(t0), 3) + " s] " +
                           o.detail.str();
        for (const auto& f : o.failures) line += " | failed: " + f;
        for (const auto& k : o.known) line += " | known: " + k;
        std::printf("%s\n", line.c_str());
        std::fflush(stdout);
        if (!o.failures.empty()) ++unexpected;
    }
    return unexpected == 0 ? 0 : 1;
}
