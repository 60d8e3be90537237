#include "canon/monodromy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "canon/error.hpp"
#include "canon/fit.hpp"

namespace canon {

LogScaledMatrix::LogScaledMatrix() : m_{Complex(1.0), Complex(0.0), Complex(0.0), Complex(1.0)} {}

LogScaledMatrix::LogScaledMatrix(const Matrix2& entries, long double log_scale) : m_(entries), log_scale_(log_scale) {
    rescale();
}

void LogScaledMatrix::left_multiply(const Matrix2& f) {
    const Matrix2 w = m_;
    m_[0] = f[0] * w[0] + f[1] * w[2];
    m_[1] = f[0] * w[1] + f[1] * w[3];
    m_[2] = f[2] * w[0] + f[3] * w[2];
    m_[3] = f[2] * w[1] + f[3] * w[3];
    rescale();
}

void LogScaledMatrix::rescale() {
    double big = 0.0;
    for (const auto& e : m_) big = std::max(big, std::norm(e));
    if (!std::isfinite(big)) fail(ErrorKind::numeric, "monodromy product produced a non-finite entry");
    if (big == 0.0) fail(ErrorKind::numeric, "monodromy product vanished");
    int e2 = 0;
    std::frexp(big, &e2);  // big = f 2^e2, f in [1/2, 1)
    // Shift by 2^{-k} with k = floor(e2 / 2): max modulus lands in [1/sqrt(2), sqrt(2)).
    const int k = e2 >= 0 ? e2 / 2 : -((-e2 + 1) / 2);
    if (k == 0) return;
    for (auto& e : m_) e = Complex(std::ldexp(e.real(), -k), std::ldexp(e.imag(), -k));
    log_scale_ += static_cast<long double>(k) * 0.69314718055994530941723212145817657L;
}

double LogScaledMatrix::log_max_abs() const {
    double big = 0.0;
    for (const auto& e : m_) big = std::max(big, std::abs(e));
    return static_cast<double>(log_scale_ + static_cast<long double>(std::log(big)));
}

double LogScaledMatrix::log_abs(int i, int j) const {
    const double a = std::abs(entry(i, j));
    if (a == 0.0) return -std::numeric_limits<double>::infinity();
    return static_cast<double>(log_scale_ + static_cast<long double>(std::log(a)));
}

double LogScaledMatrix::det_relative_error() const {
    const Complex det = m_[0] * m_[3] - m_[1] * m_[2];
    const double products = std::abs(m_[0]) * std::abs(m_[3]) + std::abs(m_[1]) * std::abs(m_[2]);
    const long double two_l = 2.0L * log_scale_;
    // Represented: det_rep = e^{2L} det, products_rep = e^{2L} products.
    if (two_l + static_cast<long double>(std::log(products)) > 0.0L) {
        const double target = static_cast<double>(std::exp(-two_l));
        return std::abs(det - target) / products;
    }
    const double s = static_cast<double>(std::exp(two_l));
    return std::abs(det * s - 1.0);
}

Matrix2 LogScaledMatrix::value() const {
    const double s = static_cast<double>(std::exp(log_scale_));
    return {m_[0] * s, m_[1] * s, m_[2] * s, m_[3] * s};
}

Matrix2 interval_transfer(double length, double phi, Complex z) {
    return interval_transfer(Interval{length, std::cos(phi), std::sin(phi)}, z);
}

Matrix2 interval_transfer(const Interval& iv, Complex z) {
    if (!(iv.length > 0.0)) fail(ErrorKind::invalid_hamiltonian, "interval length must be positive");
    const Complex t = z * iv.length;
    const double c = iv.cos_phi, s = iv.sin_phi;
    return {1.0 + t * (c * s), t * (s * s), -t * (c * c), 1.0 - t * (c * s)};
}

LogScaledMatrix monodromy(const HamburgerHamiltonian& h, Index n, Complex z) {
    if (n < 1) fail(ErrorKind::precondition, "monodromy needs N >= 1");
    LogScaledMatrix w;
    if (z == Complex(0.0)) {
        validate(h, n);
        return w;
    }
    IntervalCursor cur(h);
    for (Index k = 1; k <= n; ++k) w.left_multiply(interval_transfer(cur.next(), z));
    return w;
}

LogScaledMatrix monodromy(const FiniteRankHamiltonian& h, Complex z) {
    h.validate();
    LogScaledMatrix w;
    if (z == Complex(0.0)) return w;
    for (std::size_t k = 0; k < h.size(); ++k) w.left_multiply(interval_transfer(h.lengths[k], h.angles[k], z));
    return w;
}

std::array<std::vector<double>, 4> monodromy_polynomials(const FiniteRankHamiltonian& h) {
    h.validate();
    std::array<std::vector<double>, 4> p{std::vector<double>{1.0}, std::vector<double>{0.0}, std::vector<double>{0.0},
                                         std::vector<double>{1.0}};
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double c = std::cos(h.angles[k]), s = std::sin(h.angles[k]), l = h.lengths[k];
        // factor I + z A with A = -l J xi xi^T
        const std::array<double, 4> a{l * c * s, l * s * s, -l * c * c, -l * c * s};
        std::array<std::vector<double>, 4> next;
        const std::size_t deg = p[0].size() + 1;
        for (auto& v : next) v.assign(deg, 0.0);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                auto& out = next[static_cast<std::size_t>(2 * i + j)];
                const auto& same = p[static_cast<std::size_t>(2 * i + j)];
                for (std::size_t d = 0; d < same.size(); ++d) out[d] += same[d];
                for (int m = 0; m < 2; ++m) {
                    const double coef = a[static_cast<std::size_t>(2 * i + m)];
                    const auto& src = p[static_cast<std::size_t>(2 * m + j)];
                    for (std::size_t d = 0; d < src.size(); ++d) out[d + 1] += coef * src[d];
                }
            }
        p = std::move(next);
    }
    return p;
}

// ---------------------------------------------------------------------------

namespace {

double closed_tail(const HamburgerHamiltonian& h, Index n) {
    auto t = length_tail(h, n);
    if (!t) fail(ErrorKind::inapplicable, "truncation needs a length rule with a closed-form tail");
    if (t->is_infinite()) fail(ErrorKind::inapplicable, "length series diverges (limit point case)");
    return std::max(0.0, t->value());
}

}  // namespace

GrowthPoint growth_point(const HamburgerHamiltonian& h, double R, const OrderConfig& cfg) {
    if (!(R > 0.0)) fail(ErrorKind::precondition, "grid values must be positive");
    GrowthPoint pt;
    pt.R = R;
    IntervalCursor cur(h);
    LogScaledMatrix w;
    const Complex z(0.0, R);
    const double eps = cfg.truncation == TruncationRule::absolute ? cfg.tail_tolerance : cfg.relative_tolerance;
    double tail = closed_tail(h, 0);
    Index next_check = 1;
    Index n = 0;
    for (;;) {
        if (n >= cfg.work_budget) {
            pt.converged = false;
            break;
        }
        ++n;
        const Interval iv = cur.next();
        w.left_multiply(interval_transfer(iv, z));
        if (n == next_check) {
            tail = closed_tail(h, n);
            next_check = n + std::max<Index>(1, n / 128);
        } else {
            tail -= iv.length;
            if (tail <= 0.0) tail = closed_tail(h, n);
        }
        const double lhs = R * tail;
        bool done;
        if (cfg.truncation == TruncationRule::absolute) {
            done = lhs < eps;
        } else {
            done = lhs <= eps * std::max(1.0, static_cast<double>(w.log_scale()));
        }
        if (done) break;
    }
    pt.truncation = n;
    pt.tail = closed_tail(h, n);
    const double lw = w.log_max_abs();
    pt.log_log_max = lw > 0.0 ? std::log(lw) : std::numeric_limits<double>::quiet_NaN();
    return pt;
}

int worker_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CANON_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace {

std::vector<GrowthPoint> evaluate_grid(const HamburgerHamiltonian& h, const std::vector<double>& grid,
                                       const OrderConfig& cfg) {
    std::vector<GrowthPoint> out(grid.size());
    const int nthreads = std::min<int>(worker_threads(cfg.threads), static_cast<int>(grid.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            try {
                out[i] = growth_point(h, grid[i], cfg);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    if (nthreads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
    std::vector<double> g;
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < points; ++i) g.push_back(std::exp(a + (b - a) * i / (points - 1)));
    g.front() = lo;
    g.back() = hi;
    return g;
}

}  // namespace

OrderEstimate order_estimate(const HamburgerHamiltonian& h, const OrderConfig& cfg) {
    if (cfg.grid_points < 4) fail(ErrorKind::insufficient_data, "grid too short to fit (< 4 points)");
    if (!(cfg.fit_fraction > 0.0 && cfg.fit_fraction <= 1.0)) fail(ErrorKind::validation, "fit fraction must lie in (0, 1]");
    if (!(cfg.tail_tolerance > 0.0) || !(cfg.relative_tolerance > 0.0))
        fail(ErrorKind::validation, "tail tolerances must be positive");
    if (!cfg.override_limit) {
        const auto cls = classify_limit(h, cfg.classify_horizon, 1e-8);
        if (cls.kind != LimitKind::limit_circle)
            fail(ErrorKind::inapplicable, "order estimate needs the limit circle case (" + cls.reason + ")");
    }
    OrderEstimate est;
    double lo, hi;
    if (cfg.r_min || cfg.r_max) {
        if (!cfg.r_min || !cfg.r_max) fail(ErrorKind::validation, "give both R_min and R_max or neither");
        lo = *cfg.r_min;
        hi = *cfg.r_max;
        if (!(lo > 1.0 && hi > lo)) fail(ErrorKind::validation, "grid needs 1 < R_min < R_max");
    } else {
        // Largest power of ten whose product fits the work budget.
        est.automatic_grid = true;
        double best = 0.0;
        for (double r = 100.0; r <= cfg.auto_r_cap * 1.0000001; r *= 10.0) {
            if (!growth_point(h, r, cfg).converged) break;
            best = r;
        }
        if (best == 0.0) fail(ErrorKind::insufficient_data, "work budget too small for R = 100");
        hi = best;
        lo = std::max(2.0, hi * std::pow(10.0, -cfg.auto_decades));
        if (!(hi > lo)) fail(ErrorKind::insufficient_data, "automatic grid is empty");
    }
    est.r_min = lo;
    est.r_max = hi;
    est.curve.points = evaluate_grid(h, geometric_grid(lo, hi, cfg.grid_points), cfg);

    const double cut = std::log(lo) + (1.0 - cfg.fit_fraction) * (std::log(hi) - std::log(lo));
    std::vector<double> x, y;
    int skipped = 0;
    for (const auto& p : est.curve.points) {
        if (std::log(p.R) < cut - 1e-12) continue;
        if (!p.converged || !std::isfinite(p.log_log_max)) {
            ++skipped;
            continue;
        }
        x.push_back(std::log(p.R));
        y.push_back(p.log_log_max);
    }
    if (skipped > 0)
        est.warnings.push_back(std::to_string(skipped) + " grid points in the fit window were not converged or had ln|W| <= 0");
    const std::size_t need = cfg.log_term ? 4 : 3;
    if (x.size() < need) fail(ErrorKind::insufficient_data, "grid too short to fit (< 4 usable points)");
    est.fit_points = static_cast<int>(x.size());
    const auto plain = fit_slope(x, y, false);
    est.plain_slope = plain.slope;
    est.plain_stderr = plain.stderr_of;
    if (cfg.log_term) {
        const auto full = fit_slope(x, y, true);
        est.rho_hat = full.slope;
        est.stderr_of = full.stderr_of;
        est.log_coefficient = full.log_term;
    } else {
        est.rho_hat = plain.slope;
        est.stderr_of = plain.stderr_of;
    }
    for (const auto& p : est.curve.points)
        if (!p.converged) {
            est.warnings.push_back("truncation rule not met within the work budget at some grid points");
            break;
        }
    return est;
}

// ---------------------------------------------------------------------------

std::string growth_curve_csv(const GrowthCurve& c) {
    std::string out = "R,logLogMax,truncationIndex\n";
    char buf[128];
    for (const auto& p : c.points) {
        std::snprintf(buf, sizeof buf, "%.10e,%.10e,%lld\n", p.R, p.log_log_max, static_cast<long long>(p.truncation));
        out += buf;
    }
    return out;
}

nlohmann::json to_json(const GrowthCurve& c) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : c.points) {
        nlohmann::json row{{"R", p.R}, {"truncationIndex", p.truncation}, {"tail", p.tail}, {"converged", p.converged}};
        row["logLogMax"] = std::isfinite(p.log_log_max) ? nlohmann::json(p.log_log_max) : nlohmann::json(nullptr);
        arr.push_back(row);
    }
    return arr;
}

nlohmann::json to_json(const OrderConfig& c) {
    nlohmann::json j{{"grid_points", c.grid_points},
                     {"fit_fraction", c.fit_fraction},
                     {"tail_tolerance", c.tail_tolerance},
                     {"relative_tolerance", c.relative_tolerance},
                     {"truncation", c.truncation == TruncationRule::relative ? "relative" : "absolute"},
                     {"work_budget", c.work_budget},
                     {"auto_decades", c.auto_decades},
                     {"auto_r_cap", c.auto_r_cap},
                     {"log_term", c.log_term},
                     {"override_limit", c.override_limit}};
    j["r_min"] = c.r_min ? nlohmann::json(*c.r_min) : nlohmann::json("auto");
    j["r_max"] = c.r_max ? nlohmann::json(*c.r_max) : nlohmann::json("auto");
    return j;
}

OrderConfig order_config_from_json(const nlohmann::json& j, OrderConfig c) {
    if (!j.is_object()) fail(ErrorKind::validation, "order configuration must be an object");
    try {
        auto num_or_auto = [&](const char* key, std::optional<double>& dst) {
            if (!j.contains(key)) return;
            const auto& v = j.at(key);
            if (v.is_string() && v.get<std::string>() == "auto") dst.reset();
            else dst = v.get<double>();
        };
        num_or_auto("r_min", c.r_min);
        num_or_auto("r_max", c.r_max);
        if (j.contains("grid_points")) c.grid_points = j.at("grid_points").get<int>();
        if (j.contains("fit_fraction")) c.fit_fraction = j.at("fit_fraction").get<double>();
        if (j.contains("tail_tolerance")) c.tail_tolerance = j.at("tail_tolerance").get<double>();
        if (j.contains("relative_tolerance")) c.relative_tolerance = j.at("relative_tolerance").get<double>();
        if (j.contains("truncation")) {
            const auto t = j.at("truncation").get<std::string>();
            if (t == "relative") c.truncation = TruncationRule::relative;
            else if (t == "absolute") c.truncation = TruncationRule::absolute;
            else fail(ErrorKind::validation, "truncation must be \"relative\" or \"absolute\"");
        }
        if (j.contains("work_budget")) c.work_budget = j.at("work_budget").get<Index>();
        if (j.contains("auto_decades")) c.auto_decades = j.at("auto_decades").get<double>();
        if (j.contains("auto_r_cap")) c.auto_r_cap = j.at("auto_r_cap").get<double>();
        if (j.contains("log_term")) c.log_term = j.at("log_term").get<bool>();
        if (j.contains("override_limit")) c.override_limit = j.at("override_limit").get<bool>();
        if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::validation, std::string("order configuration: ") + e.what());
    }
    return c;
}

nlohmann::json to_json(const OrderEstimate& e) {
    return {{"rhoHat", e.rho_hat},
            {"stderr", e.stderr_of},
            {"plainSlope", e.plain_slope},
            {"plainStderr", e.plain_stderr},
            {"logCoefficient", e.log_coefficient},
            {"fitPoints", e.fit_points},
            {"R_min", e.r_min},
            {"R_max", e.r_max},
            {"automaticGrid", e.automatic_grid},
            {"warnings", e.warnings},
            {"curve", to_json(e.curve)}};
}

}  // namespace canon
