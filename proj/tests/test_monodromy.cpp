#include <doctest.h>

#include "check_near.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "canon/error.hpp"
#include "canon/monodromy.hpp"

using namespace canon;
using std::numbers::pi;

namespace {

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

double max_entry_diff(const Matrix2& a, const Matrix2& b) {
    double d = 0.0;
    for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("single interval transfer") {
    auto m = interval_transfer(1.0, 0.0, Complex(0.0, 2.0));
    CHECK(max_entry_diff(m, {Complex(1), Complex(0), Complex(0, -2), Complex(1)}) < 1e-15);
    auto id = interval_transfer(0.7, 1.1, Complex(0.0));
    CHECK(max_entry_diff(id, {Complex(1), Complex(0), Complex(0), Complex(1)}) == 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 100; ++i) {
        auto t = interval_transfer(std::exp(u(rng)), u(rng), Complex(u(rng), u(rng)));
        CHECK(std::abs(t[0] * t[3] - t[1] * t[2] - 1.0) < 1e-14 * std::max(1.0, std::abs(t[0] * t[3])));
    }
    CHECK_THROWS_AS(interval_transfer(0.0, 0.0, Complex(1.0)), Error);
}

TEST_CASE("product orientation on two intervals") {
    FiniteRankHamiltonian h{{1.0, 1.0}, {0.0, pi / 2}};
    for (Complex z : {Complex(0.3, 0.0), Complex(0.0, 2.0), Complex(-1.5, 0.7)}) {
        auto w = monodromy(h, z).value();
        Matrix2 want{1.0 - z * z, z, -z, Complex(1.0)};
        CHECK(max_entry_diff(w, want) < 1e-14 * std::max(1.0, std::norm(z)));
    }
}

TEST_CASE("identity at z = 0") {
    HamburgerHamiltonian h{SequenceSpec::power(2.0), SequenceSpec::arithmetic_step(0.0, SequenceSpec::power(1.5))};
    auto w = monodromy(h, 1000, Complex(0.0));
    CHECK(w.log_scale() == 0.0L);
    CHECK(max_entry_diff(w.entries(), {Complex(1), Complex(0), Complex(0), Complex(1)}) == 0.0);
}

TEST_CASE("log scaling keeps entries normalized and det one") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        auto h = random_hamiltonian(rng, 10000);
        auto w = monodromy(h, Complex(0.0, 1e6));
        double big = 0.0;
        for (const auto& e : w.entries()) big = std::max(big, std::abs(e));
        CHECK(big >= 0.5);
        CHECK(big <= 2.0);
        CHECK(w.log_scale() > 100.0L);
        CHECK(w.det_relative_error() < 1e-10);
        auto wc = monodromy(h, Complex(0.0, -1e6));
        CHECK(wc.log_scale() == w.log_scale());
        for (int i = 0; i < 4; ++i) CHECK(std::abs(wc.entries()[i] - std::conj(w.entries()[i])) < 1e-12);
    }
}

TEST_CASE("entries are polynomials of degree N") {
    std::mt19937_64 rng(3);
    for (int n = 1; n <= 12; ++n) {
        auto h = random_hamiltonian(rng, n);
        auto poly = monodromy_polynomials(h);
        // Interpolate from values at N+1 points on a circle (discrete Fourier transform).
        const int m = n + 1;
        const double r = 1.0;
        std::array<std::vector<Complex>, 4> coef;
        for (auto& c : coef) c.assign(m, Complex(0.0));
        for (int k = 0; k < m; ++k) {
            const Complex z = std::polar(r, 2 * pi * k / m);
            auto w = monodromy(h, z).value();
            for (int e = 0; e < 4; ++e)
                for (int d = 0; d < m; ++d) coef[e][d] += w[e] * std::polar(1.0, -2 * pi * k * d / m) / double(m);
        }
        for (int e = 0; e < 4; ++e) {
            REQUIRE(poly[e].size() == static_cast<std::size_t>(m));
            for (int d = 0; d < m; ++d) {
                CHECK(std::fabs(coef[e][d].real() - poly[e][d]) < 1e-12);
                CHECK(std::fabs(coef[e][d].imag()) < 1e-12);
            }
        }
    }
}

TEST_CASE("growth point truncation rules") {
    HamburgerHamiltonian h{SequenceSpec::power(2.0), SequenceSpec::arithmetic_step(0.0, SequenceSpec::constant(pi / 2))};
    OrderConfig abs_cfg;
    abs_cfg.truncation = TruncationRule::absolute;
    auto p = growth_point(h, 1000.0, abs_cfg);
    // tail after N is about 1/N: need 1000/N < 1e-3.
    CHECK_NEAR(p.truncation, 1e6, 10000);
    CHECK(1000.0 * p.tail < 1e-3);
    auto q = growth_point(h, 1000.0, OrderConfig{});
    CHECK(q.truncation < p.truncation);
    CHECK(1000.0 * q.tail <= 0.03 * std::exp(q.log_log_max) * 1.01);
    OrderConfig tiny;
    tiny.work_budget = 10;
    CHECK_FALSE(growth_point(h, 1000.0, tiny).converged);
}

TEST_CASE("order estimate on a monotone diagonal family") {
    HamburgerHamiltonian h{SequenceSpec::power(2.0), SequenceSpec::arithmetic_step(0.0, SequenceSpec::constant(pi / 2))};
    OrderConfig cfg;
    cfg.work_budget = 2'000'000;
    cfg.grid_points = 16;
    auto e = order_estimate(h, cfg);
    CHECK(e.automatic_grid);
    CHECK_NEAR(e.rho_hat, 0.5, 0.05);
    CHECK(e.rho_hat <= 1.05);
    auto csv = growth_curve_csv(e.curve);
    CHECK(csv.rfind("R,logLogMax,truncationIndex\n", 0) == 0);
    CHECK(csv == growth_curve_csv(e.curve));
}

TEST_CASE("order estimate preconditions") {
    HamburgerHamiltonian lp{SequenceSpec::power(1.0), SequenceSpec::arithmetic_step(0.0, SequenceSpec::constant(pi / 2))};
    try {
        order_estimate(lp);
        FAIL("limit point accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::inapplicable);
    }
    HamburgerHamiltonian h{SequenceSpec::power(2.0), SequenceSpec::arithmetic_step(0.0, SequenceSpec::constant(pi / 2))};
    OrderConfig cfg;
    cfg.grid_points = 3;
    CHECK_THROWS_AS(order_estimate(h, cfg), Error);
}

TEST_CASE("order configuration json") {
    OrderConfig c;
    c.r_min = 10.0;
    c.r_max = 1e4;
    c.truncation = TruncationRule::absolute;
    auto back = order_config_from_json(to_json(c));
    CHECK(*back.r_min == 10.0);
    CHECK(back.truncation == TruncationRule::absolute);
    auto a = order_config_from_json(nlohmann::json{{"r_min", "auto"}});
    CHECK_FALSE(a.r_min);
    CHECK_THROWS_AS(order_config_from_json(nlohmann::json{{"truncation", "weird"}}), Error);
}
