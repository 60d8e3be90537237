#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <json.hpp>

#include "canon/fit.hpp"
#include "canon/hamiltonian.hpp"
#include "canon/logvalue.hpp"

namespace canon {

// Moment arithmetic needs far more than double precision: Hankel matrices of
// moments are ill-conditioned well beyond 1e16 at modest sizes.
using HighPrecision = boost::multiprecision::cpp_bin_float_100;

// Three-term recurrence z p_k = rho_{k+1} p_{k+1} + q_{k+1} p_k + rho_k p_{k-1}
// with p_{-1} = 0 and p_0 = 1/sqrt(mass). offdiag[i] holds rho_{i+1}, diag[i] holds q_{i+1}.
struct JacobiParameters {
    std::vector<double> offdiag;
    std::vector<double> diag;
    double mass = 1.0;  // s_0

    Index size() const noexcept { return static_cast<Index>(std::min(offdiag.size(), diag.size())); }
    void validate() const;
    static JacobiParameters from_specs(const SequenceSpec& rho, const SequenceSpec& q, Index n, double mass = 1.0);
};

struct MomentSequence {
    std::vector<HighPrecision> values;  // s_0 .. s_{2N}
    bool normalized = true;             // s_0 == 1

    Index degree() const noexcept { return values.empty() ? -1 : static_cast<Index>((values.size() - 1) / 2); }
    static MomentSequence from_doubles(const std::vector<double>& s);
};

struct PolynomialTable {
    Index degree = 0;
    double mass = 1.0;
    bool has_coefficients = false;
    // first[n][k] = b_{k,n}, coefficient of z^k in p_n (k <= n).
    std::vector<std::vector<LogValue>> first;
    // second[n][k] = coefficient of z^k in Q_n (k < n).
    std::vector<std::vector<LogValue>> second;
    std::vector<double> p_at_zero;    // p_n(0), n = 0..N
    std::vector<double> q_at_zero;    // Q_n(0), n = 0..N
    std::vector<double> log_leading;  // ln b_{n,n}, n = 0..N

    LogValue coefficient(Index k, Index n) const;
};

// Degrees 0..N. Coefficient tables cost O(N^2) memory and can be skipped.
PolynomialTable polynomial_tables(const JacobiParameters& j, Index n, bool with_coefficients = true);

// ln b_{n,n} = -ln(sqrt(mass)) - sum_{k<=n} ln rho_k, n = 0..N, without building a table.
std::vector<double> log_leading_coefficients(const JacobiParameters& j, Index n);

// Hankel Cholesky in high precision. s_0..s_{2N} gives rho_1..rho_N and q_1..q_N.
JacobiParameters moments_to_jacobi(const MomentSequence& s);

// s_0..s_{2N}; needs rho, q through N.
MomentSequence jacobi_to_moments(const JacobiParameters& j, Index n);

// rho_n, q_n for n = 1..N from intervals 1..N+1. q_1 uses phi_0 := phi_1 + pi/2.
JacobiParameters jacobi_from_hamiltonian(const HamburgerHamiltonian& h, Index n);
JacobiParameters jacobi_from_hamiltonian(const FiniteRankHamiltonian& h);

// q_n from the angles of intervals n-1, n, n+1 (n >= 2).
double diagonal_from_angles(double length, double phi_prev, double phi, double phi_next);

// N intervals from p_{n-1}(0), Q_{n-1}(0), n = 1..N; needs rho, q through N-1.
// Verifies that mapping back reproduces J to 1e-8 and throws a numeric error otherwise.
FiniteRankHamiltonian hamiltonian_from_jacobi(const JacobiParameters& j, Index n);

struct LivsicReport {
    std::optional<NLogNRatio> livsic;   // estimate of limsup 2n ln n / ln s_{2n}
    std::optional<NLogNRatio> leading;  // estimate of limsup n ln n / ln(1/b_{n,n})
    std::optional<double> m62_min;      // min_n b_{n,n} sqrt(s_{2n})
    bool m62_holds = true;
    Index horizon = 0;
};

// Estimates are reported as 2/ratio and 1/ratio of the corresponding liminf ratios.
struct LivsicEstimate {
    double corrected = 0.0;
    double raw = 0.0;
    double drift = 0.0;
};
LivsicEstimate livsic_value(const NLogNRatio& r);
LivsicEstimate leading_value(const NLogNRatio& r);

// log_even_moments[n] = ln s_{2n}, log_leading[n] = ln b_{n,n} for n = 0..horizon.
// Either may be empty.
LivsicReport livsic_bounds(const std::vector<double>& log_even_moments, const std::vector<double>& log_leading,
                           Index horizon);
LivsicReport livsic_bounds(const MomentSequence& s, Index horizon);
LivsicReport livsic_bounds(const PolynomialTable& t, Index horizon);
LivsicReport livsic_bounds(const MomentSequence& s, const PolynomialTable& t, Index horizon);

// min over n <= horizon of b_{n,n} sqrt(s_{2n}); at least 1 for every valid pair.
double leading_moment_product(const std::vector<double>& log_even_moments, const std::vector<double>& log_leading,
                              Index horizon);
double leading_moment_product(const MomentSequence& s, const PolynomialTable& t, Index horizon);

struct CoefficientOrder {
    double estimate = 0.0;    // max over the k-range of 2k ln k / ln(1 / sum_n b_{k,n}^2)
    Index argmax_k = 0;
    Index truncation = 0;     // N, the last degree in every tail sum
    bool lower_biased = true; // tail sums are truncated at N
    bool stabilized = false;  // estimate over the upper half of the range within 0.02 of the lower half
    std::vector<std::pair<Index, double>> per_k;
};

// leading_only keeps just the b_{k,k} term of every sum.
CoefficientOrder order_from_coefficients(const PolynomialTable& t, Index k_from, Index k_to, bool leading_only = false);

nlohmann::json to_json(const JacobiParameters& j);
JacobiParameters jacobi_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MomentSequence& s);
MomentSequence moments_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PolynomialTable& t);
nlohmann::json log_value_json(LogValue v);

}  // namespace canon
