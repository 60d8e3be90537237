#include <doctest.h>

#include "check_near.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "canon/error.hpp"
#include "canon/recurrence.hpp"

using namespace canon;
using std::numbers::pi;
using Rational = boost::multiprecision::cpp_rational;

namespace {

JacobiParameters random_jacobi(std::mt19937_64& rng, Index n, double rlo, double rhi, double qlim) {
    std::uniform_real_distribution<double> r(rlo, rhi), q(-qlim, qlim);
    JacobiParameters j;
    for (Index k = 0; k < n; ++k) {
        j.offdiag.push_back(r(rng));
        j.diag.push_back(q(rng));
    }
    return j;
}

double rel(double a, double b, double scale) { return std::fabs(a - b) / scale; }

HighPrecision catalan(int n) {
    HighPrecision c = 1;
    for (int k = 0; k < n; ++k) c = c * 2 * (2 * k + 1) / (k + 2);
    return c;
}

}  // namespace

TEST_CASE("index convention in exact arithmetic") {
    // p_0 = 1, Q_0 = 0, Q_1 = 1/rho_1; the cross product of consecutive vectors
    // (p_{n-1}, Q_{n-1}) is 1/rho_n and the dot products give q_n.
    const int N = 10;
    std::vector<Rational> rho, q;
    for (int k = 1; k <= N + 1; ++k) {
        rho.emplace_back(Rational(k + 2, 2 * k + 1));
        q.emplace_back(Rational(k % 3 - 1, k + 1));
    }
    std::vector<Rational> p{1}, Q{0};
    p.push_back(-q[0] / rho[0]);
    Q.push_back(Rational(1) / rho[0]);
    for (int m = 1; m < N; ++m) {
        p.push_back((-q[m] * p[m] - rho[m - 1] * p[m - 1]) / rho[m]);
        Q.push_back((-q[m] * Q[m] - rho[m - 1] * Q[m - 1]) / rho[m]);
    }
    for (int n = 1; n < N; ++n) {
        const Rational cross = p[n - 1] * Q[n] - p[n] * Q[n - 1];
        CHECK(cross * rho[n - 1] == 1);
        const Rational len = p[n - 1] * p[n - 1] + Q[n - 1] * Q[n - 1];
        Rational dots = rho[n - 1] * (p[n - 1] * p[n] + Q[n - 1] * Q[n]);
        if (n > 1) dots += rho[n - 2] * (p[n - 2] * p[n - 1] + Q[n - 2] * Q[n - 1]);
        CHECK(-dots / len == q[n - 1]);
    }
    // Leading coefficients: b_{n,n} = 1 / (rho_1 ... rho_n).
    std::vector<std::vector<Rational>> b{{1}};
    b.push_back({-q[0] / rho[0], Rational(1) / rho[0]});
    for (int m = 1; m < N; ++m) {
        std::vector<Rational> next(m + 2);
        for (int k = 0; k <= m + 1; ++k) {
            Rational v = 0;
            if (k >= 1) v += b[m][k - 1];
            if (k <= m) v -= q[m] * b[m][k];
            if (k <= m - 1) v -= rho[m - 1] * b[m - 1][k];
            next[k] = v / rho[m];
        }
        b.push_back(next);
    }
    Rational prod = 1;
    for (int n = 1; n <= N; ++n) {
        prod *= rho[n - 1];
        CHECK(b[n][n] * prod == 1);
    }
}

TEST_CASE("polynomial tables") {
    JacobiParameters j{std::vector<double>(10, 0.5), std::vector<double>(10, 0.0)};
    auto t = polynomial_tables(j, 10);
    CHECK(t.coefficient(2, 2).to_double() == doctest::Approx(4.0));
    CHECK(t.coefficient(1, 2).is_zero());
    CHECK(t.coefficient(0, 2).to_double() == doctest::Approx(-1.0));
    for (Index n = 1; n <= 10; n += 2) CHECK(t.p_at_zero[n] == 0.0);
    CHECK_FALSE(t.p_at_zero[2] == 0.0);

    std::mt19937_64 rng(7);
    auto r = random_jacobi(rng, 20, 0.1, 10.0, 5.0);
    r.mass = 2.5;
    auto rt = polynomial_tables(r, 20);
    double log_prod = -0.5 * std::log(r.mass);
    for (Index n = 1; n <= 20; ++n) {
        log_prod -= std::log(r.offdiag[n - 1]);
        CHECK(std::fabs(rt.coefficient(n, n).log_abs - log_prod) < 1e-10 * std::max(1.0, std::fabs(log_prod)));
        CHECK(rt.coefficient(n, n).sign == 1);
        CHECK(std::fabs(rt.log_leading[n] - log_prod) < 1e-12 * std::max(1.0, std::fabs(log_prod)));
    }
    JacobiParameters bad{{1.0, -1.0}, {0.0, 0.0}};
    try {
        polynomial_tables(bad, 2);
        FAIL("negative rho accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_jacobi);
    }
}

TEST_CASE("moments of the semicircle") {
    const int N = 20;
    MomentSequence s;
    for (int k = 0; k <= 2 * N; ++k) {
        if (k % 2) s.values.emplace_back(0);
        else s.values.push_back(catalan(k / 2) / pow(HighPrecision(4), k / 2));
    }
    auto j = moments_to_jacobi(s);
    REQUIRE(j.size() == N);
    for (Index n = 0; n < N; ++n) {
        CHECK(j.offdiag[n] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(std::fabs(j.diag[n]) < 1e-14);
    }
    JacobiParameters half{std::vector<double>(4, 0.5), std::vector<double>(4, 0.0)};
    auto m = jacobi_to_moments(half, 2);
    CHECK(static_cast<double>(m.values[4]) == doctest::Approx(0.125));
    CHECK(m.values[1] == 0);
    CHECK(m.values[3] == 0);
}

TEST_CASE("Gaussian-type moments give zero diagonal") {
    std::vector<double> s{1, 0, 1, 0, 3, 0, 15, 0, 105, 0, 945};
    auto j = moments_to_jacobi(MomentSequence::from_doubles(s));
    for (Index n = 0; n < j.size(); ++n) {
        CHECK(std::fabs(j.diag[n]) < 1e-14);
        CHECK(j.offdiag[n] == doctest::Approx(std::sqrt(double(n + 1))));
    }
}

TEST_CASE("singular Hankel matrix is rejected") {
    // Point mass at 1: all moments 1, Hankel matrix of rank one.
    std::vector<double> s(7, 1.0);
    try {
        moments_to_jacobi(MomentSequence::from_doubles(s));
        FAIL("singular Hankel accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ill_conditioned_moments);
        CHECK(std::string(e.what()).find("size 2") != std::string::npos);
    }
}

TEST_CASE("J to s to J round trip") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        auto j = random_jacobi(rng, 30, 0.1, 10.0, 5.0);
        auto s = jacobi_to_moments(j, 30);
        auto back = moments_to_jacobi(s);
        REQUIRE(back.size() == 30);
        for (Index n = 0; n < 30; ++n) {
            CHECK(rel(back.offdiag[n], j.offdiag[n], j.offdiag[n]) < 1e-8);
            CHECK(rel(back.diag[n], j.diag[n], std::max(std::fabs(j.diag[n]), 1e-300)) < 1e-8);
        }
    }
}

TEST_CASE("Jacobi from Hamiltonian examples") {
    auto a = jacobi_from_hamiltonian(FiniteRankHamiltonian{{1.0, 1.0}, {0.0, pi / 2}});
    CHECK(a.offdiag[0] == doctest::Approx(1.0));
    auto b = jacobi_from_hamiltonian(FiniteRankHamiltonian{{1.0, 4.0}, {0.0, pi / 6}});
    CHECK(b.offdiag[0] == doctest::Approx(1.0));

    HamburgerHamiltonian d{SequenceSpec::power(2.0), SequenceSpec::arithmetic_step(0.0, SequenceSpec::constant(pi / 2))};
    auto j = jacobi_from_hamiltonian(d, 100);
    for (double q : j.diag) CHECK(q == 0.0);
    CHECK(j.mass == 1.0);

    CHECK(diagonal_from_angles(2.0, 0.0, pi / 4, pi / 2) == doctest::Approx(-1.0));
}

TEST_CASE("H to J to H round trip") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> len(0.01, 2.0), step(0.1, pi - 0.1);
    for (int trial = 0; trial < 10; ++trial) {
        const int N = 100;
        FiniteRankHamiltonian h;
        double phi = 0.0;
        for (int n = 0; n < N; ++n) {
            h.lengths.push_back(len(rng));
            h.angles.push_back(phi);
            phi += step(rng);
        }
        auto j = jacobi_from_hamiltonian(h);
        auto back = hamiltonian_from_jacobi(j, N);
        for (int n = 0; n < N; ++n) CHECK(rel(back.lengths[n], h.lengths[n], h.lengths[n]) < 1e-8);
        for (int n = 0; n + 1 < N; ++n) {
            const double d0 = reduce_angle(h.angles[n + 1] - h.angles[n]);
            const double d1 = reduce_angle(back.angles[n + 1] - back.angles[n]);
            CHECK(std::fabs(std::sin(d0 - d1)) < 1e-8);
        }
    }
}

TEST_CASE("Jacobi to Hamiltonian round trip") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        // Indeterminate regime: rho_n grows like n^2 so the vectors (p_n(0), Q_n(0)) stay bounded.
        auto j = random_jacobi(rng, 50, 0.5, 2.0, 1.0);
        for (Index n = 0; n < 50; ++n) j.offdiag[n] *= double(n + 1) * double(n + 1);
        CHECK_NOTHROW(hamiltonian_from_jacobi(j, 51));
    }
    JacobiParameters half{std::vector<double>(60, 0.5), std::vector<double>(60, 0.0)};
    auto h = hamiltonian_from_jacobi(half, 40);
    auto back = jacobi_from_hamiltonian(h);
    for (double q : back.diag) CHECK(std::fabs(q) < 1e-12);
    for (double phi : h.angles) CHECK(std::fabs(std::sin(2 * phi)) < 1e-12);
}

TEST_CASE("Livsic estimates") {
    const Index n = 100000;
    std::vector<double> quartic(n + 1), double_fact(n + 1);
    for (Index k = 0; k <= n; ++k) {
        quartic[k] = 4.0 * std::lgamma(double(k) + 1.0);
        double_fact[k] = std::lgamma(2.0 * double(k) + 1.0);
    }
    auto a = livsic_bounds(quartic, {}, n);
    CHECK_NEAR(livsic_value(*a.livsic).corrected, 0.5, 0.01);
    auto b = livsic_bounds(double_fact, {}, n);
    CHECK_NEAR(livsic_value(*b.livsic).corrected, 1.0, 0.02);

    std::vector<double> bad(n + 1, -1.0);
    try {
        livsic_bounds(bad, {}, n);
        FAIL("nonpositive logarithm accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
}

TEST_CASE("leading coefficients dominate moments") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        auto j = random_jacobi(rng, 30, 0.1, 10.0, 5.0);
        auto s = jacobi_to_moments(j, 30);
        auto t = polynomial_tables(j, 30, false);
        CHECK(leading_moment_product(s, t, 30) >= 1.0 - 1e-10);
    }
}

TEST_CASE("order from coefficients on a determinate problem is not stable") {
    JacobiParameters half{std::vector<double>(300, 0.5), std::vector<double>(300, 0.0)};
    auto t = polynomial_tables(half, 300);
    auto o = order_from_coefficients(t, 2, 100);
    CHECK_FALSE(o.stabilized);
    CHECK(o.truncation == 300);
    CHECK(o.lower_biased);
}

TEST_CASE("json formats") {
    JacobiParameters j{{0.5, 0.7}, {0.1, -0.2}, 2.0};
    auto back = jacobi_from_json(to_json(j));
    CHECK(back.offdiag == j.offdiag);
    CHECK(back.mass == 2.0);
    auto s = jacobi_to_moments(j, 2);
    auto sb = moments_from_json(to_json(s));
    for (std::size_t k = 0; k < s.values.size(); ++k) CHECK(abs(sb.values[k] - s.values[k]) <= 1e-38 * abs(s.values[k]));
    auto lv = log_value_json({1, std::log(2.5e-300)});
    CHECK(lv["log10"] == -300);
    CHECK(lv["mantissa"].get<double>() == doctest::Approx(2.5));
    CHECK_THROWS_AS(moments_from_json(nlohmann::json::array({1, 0})), Error);
}
