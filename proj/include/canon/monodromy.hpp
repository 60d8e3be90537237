#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canon/hamiltonian.hpp"

namespace canon {

using Complex = std::complex<double>;

// Row-major 2x2 matrix {m00, m01, m10, m11}.
using Matrix2 = std::array<Complex, 4>;

// Represented value e^{log_scale} * entries; the largest entry has modulus in [1/2, 2].
class LogScaledMatrix {
public:
    LogScaledMatrix();  // identity
    LogScaledMatrix(const Matrix2& entries, long double log_scale);

    const Matrix2& entries() const noexcept { return m_; }
    long double log_scale() const noexcept { return log_scale_; }
    Complex entry(int i, int j) const noexcept { return m_[static_cast<std::size_t>(2 * i + j)]; }

    // this <- factor * this, then rescale by a power of two.
    void left_multiply(const Matrix2& factor);

    // ln max_{ij} |W_ij|.
    double log_max_abs() const;
    // ln |W_ij|, -inf for a zero entry.
    double log_abs(int i, int j) const;
    // |det W - 1| / max(1, |W00 W11| + |W01 W10|), evaluated without leaving the scaled form.
    double det_relative_error() const;
    // Plain value; overflows for large scales.
    Matrix2 value() const;

private:
    void rescale();

    Matrix2 m_;
    long double log_scale_ = 0.0L;
};

// Exact solution over one constant interval: I - z l J xi xi^T.
Matrix2 interval_transfer(double length, double phi, Complex z);
Matrix2 interval_transfer(const Interval& iv, Complex z);

// M_N ... M_1 (interval 1 acts first).
LogScaledMatrix monodromy(const HamburgerHamiltonian& h, Index n, Complex z);
LogScaledMatrix monodromy(const FiniteRankHamiltonian& h, Complex z);

// Real coefficient vectors of the four entries as polynomials in z (degree <= N), by
// multiplying the linear factors symbolically.
std::array<std::vector<double>, 4> monodromy_polynomials(const FiniteRankHamiltonian& h);

enum class TruncationRule {
    relative,  // R * tail(N) <= relative_tolerance * max(1, ln|W_N|)
    absolute,  // R * tail(N) < tail_tolerance
};

struct OrderConfig {
    std::optional<double> r_min;  // both unset: automatic grid
    std::optional<double> r_max;
    int grid_points = 32;
    double fit_fraction = 0.5;
    double tail_tolerance = 1e-3;
    double relative_tolerance = 0.03;  // bounds the error of ln ln|W| by about this much
    TruncationRule truncation = TruncationRule::relative;
    Index work_budget = 40'000'000;  // largest N for one product
    double auto_decades = 8.0;
    double auto_r_cap = 1e24;
    bool log_term = true;            // fit ln ln|W| on {ln R, ln ln R, 1}
    bool override_limit = false;     // skip the limit-circle requirement
    Index classify_horizon = 100'000;
    int threads = 0;                 // 0: environment or hardware default
};

struct GrowthPoint {
    double R = 0.0;
    double log_log_max = 0.0;  // ln ln max |W_ij(iR)|; NaN when ln max <= 0
    Index truncation = 0;
    double tail = 0.0;         // x_inf - x_N
    bool converged = true;     // truncation rule met within the work budget
};

struct GrowthCurve {
    std::vector<GrowthPoint> points;
};

struct OrderEstimate {
    double rho_hat = 0.0;
    double stderr_of = 0.0;
    double plain_slope = 0.0;  // two-term fit over the same points
    double plain_stderr = 0.0;
    double log_coefficient = 0.0;
    int fit_points = 0;
    double r_min = 0.0;
    double r_max = 0.0;
    bool automatic_grid = false;
    GrowthCurve curve;
    std::vector<std::string> warnings;
};

// One grid point: streams intervals until the truncation rule holds.
GrowthPoint growth_point(const HamburgerHamiltonian& h, double R, const OrderConfig& cfg);

OrderEstimate order_estimate(const HamburgerHamiltonian& h, const OrderConfig& cfg = {});

// Number of worker threads: cfg value, else CANON_THREADS, else hardware concurrency.
int worker_threads(int requested);

std::string growth_curve_csv(const GrowthCurve& c);
nlohmann::json to_json(const GrowthCurve& c);
nlohmann::json to_json(const OrderEstimate& e);
nlohmann::json to_json(const OrderConfig& c);
OrderConfig order_config_from_json(const nlohmann::json& j, OrderConfig base = {});

}  // namespace canon
