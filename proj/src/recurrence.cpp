#include "canon/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "canon/error.hpp"

namespace canon {

namespace {

constexpr double pivot_tolerance = 1e-80;
constexpr double roundtrip_tolerance = 1e-8;

std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void require_size(const JacobiParameters& j, Index n, const char* what) {
    if (j.size() < n)
        fail(ErrorKind::invalid_jacobi, std::string(what) + " needs Jacobi parameters through index " +
                                            std::to_string(n) + ", have " + std::to_string(j.size()));
}

double rho_at(const JacobiParameters& j, Index n) { return j.offdiag[static_cast<std::size_t>(n - 1)]; }
double q_at(const JacobiParameters& j, Index n) { return j.diag[static_cast<std::size_t>(n - 1)]; }

}  // namespace

void JacobiParameters::validate() const {
    if (offdiag.size() != diag.size()) fail(ErrorKind::invalid_jacobi, "offdiag and diag differ in length");
    if (!(mass > 0.0) || !std::isfinite(mass)) fail(ErrorKind::invalid_jacobi, "mass s_0 must be positive");
    for (std::size_t i = 0; i < offdiag.size(); ++i) {
        if (!(offdiag[i] > 0.0) || !std::isfinite(offdiag[i]))
            fail(ErrorKind::invalid_jacobi, "rho_" + std::to_string(i + 1) + " is not positive");
        if (!std::isfinite(diag[i])) fail(ErrorKind::invalid_jacobi, "q_" + std::to_string(i + 1) + " is not finite");
    }
}

JacobiParameters JacobiParameters::from_specs(const SequenceSpec& rho, const SequenceSpec& q, Index n, double mass) {
    JacobiParameters j;
    j.offdiag = rho.materialize(1, n);
    j.diag = q.materialize(1, n);
    j.mass = mass;
    j.validate();
    return j;
}

MomentSequence MomentSequence::from_doubles(const std::vector<double>& s) {
    if (s.empty() || s.size() % 2 == 0) fail(ErrorKind::validation, "moment list must hold s_0..s_{2N}");
    MomentSequence m;
    for (double v : s) {
        if (!std::isfinite(v)) fail(ErrorKind::validation, "moments must be finite");
        m.values.emplace_back(v);
    }
    m.normalized = s[0] == 1.0;
    return m;
}

LogValue PolynomialTable::coefficient(Index k, Index n) const {
    if (!has_coefficients) fail(ErrorKind::precondition, "polynomial table was built without coefficients");
    if (n < 0 || n > degree || k < 0 || k > n) fail(ErrorKind::precondition, "coefficient index out of range");
    return first[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

// ---------------------------------------------------------------------------

PolynomialTable polynomial_tables(const JacobiParameters& j, Index n, bool with_coefficients) {
    if (n < 1) fail(ErrorKind::precondition, "polynomial table needs degree >= 1");
    require_size(j, n, "polynomial table");
    j.validate();

    PolynomialTable t;
    t.degree = n;
    t.mass = j.mass;
    t.has_coefficients = with_coefficients;
    const auto size = static_cast<std::size_t>(n + 1);
    t.p_at_zero.assign(size, 0.0);
    t.q_at_zero.assign(size, 0.0);
    t.log_leading.assign(size, 0.0);

    const double p0 = 1.0 / std::sqrt(j.mass);
    const double q1 = std::sqrt(j.mass) / rho_at(j, 1);
    t.p_at_zero[0] = p0;
    t.q_at_zero[0] = 0.0;
    t.p_at_zero[1] = -q_at(j, 1) * p0 / rho_at(j, 1);
    t.q_at_zero[1] = q1;
    t.log_leading[0] = std::log(p0);
    for (Index k = 1; k <= n; ++k)
        t.log_leading[static_cast<std::size_t>(k)] = t.log_leading[static_cast<std::size_t>(k - 1)] - std::log(rho_at(j, k));
    for (Index m = 1; m < n; ++m) {
        const double r_next = rho_at(j, m + 1);
        const double qm = q_at(j, m + 1);
        const double r = rho_at(j, m);
        const auto i = static_cast<std::size_t>(m);
        t.p_at_zero[i + 1] = (-qm * t.p_at_zero[i] - r * t.p_at_zero[i - 1]) / r_next;
        t.q_at_zero[i + 1] = (-qm * t.q_at_zero[i] - r * t.q_at_zero[i - 1]) / r_next;
    }

    if (!with_coefficients) return t;

    t.first.resize(size);
    t.second.resize(size);
    t.first[0] = {LogValue::from_double(p0)};
    t.first[1] = {LogValue::from_double(-q_at(j, 1) * p0 / rho_at(j, 1)), LogValue::from_double(p0 / rho_at(j, 1))};
    t.second[0] = {};
    t.second[1] = {LogValue::from_double(q1)};

    // b_{k,m+1} = (b_{k-1,m} - q_{m+1} b_{k,m} - rho_m b_{k,m-1}) / rho_{m+1}
    auto step = [&](const std::vector<LogValue>& cur, const std::vector<LogValue>& prev, Index m,
                    std::size_t out_size) {
        const LogValue inv_next = LogValue::from_double(1.0 / rho_at(j, m + 1));
        const LogValue neg_q = LogValue::from_double(-q_at(j, m + 1));
        const LogValue neg_r = LogValue::from_double(-rho_at(j, m));
        std::vector<LogValue> out(out_size);
        for (std::size_t k = 0; k < out_size; ++k) {
            LogValue v;
            if (k >= 1 && k - 1 < cur.size()) v = v + cur[k - 1];
            if (k < cur.size()) v = v + neg_q * cur[k];
            if (k < prev.size()) v = v + neg_r * prev[k];
            out[k] = v * inv_next;
        }
        return out;
    };
    for (Index m = 1; m < n; ++m) {
        const auto i = static_cast<std::size_t>(m);
        t.first[i + 1] = step(t.first[i], t.first[i - 1], m, i + 2);
        t.second[i + 1] = step(t.second[i], t.second[i - 1], m, i + 1);
    }
    return t;
}

std::vector<double> log_leading_coefficients(const JacobiParameters& j, Index n) {
    require_size(j, n, "leading coefficients");
    std::vector<double> out(static_cast<std::size_t>(n + 1));
    out[0] = -0.5 * std::log(j.mass);
    for (Index k = 1; k <= n; ++k) {
        const double r = rho_at(j, k);
        if (!(r > 0.0)) fail(ErrorKind::invalid_jacobi, "rho_" + std::to_string(k) + " is not positive");
        out[static_cast<std::size_t>(k)] = out[static_cast<std::size_t>(k - 1)] - std::log(r);
    }
    return out;
}

// ---------------------------------------------------------------------------

JacobiParameters moments_to_jacobi(const MomentSequence& s) {
    const Index n = s.degree();
    if (n < 1) fail(ErrorKind::validation, "need at least s_0, s_1, s_2");
    if (!(s.values[0] > 0)) fail(ErrorKind::ill_conditioned_moments, "s_0 must be positive (failing size 1)");
    const auto m = static_cast<std::size_t>(n + 1);
    // Lower Cholesky factor of the Hankel matrix (s_{i+k}), stored row-major.
    std::vector<HighPrecision> L(m * m, HighPrecision(0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k <= i; ++k) {
            HighPrecision acc = s.values[i + k];
            for (std::size_t p = 0; p < k; ++p) acc -= L[i * m + p] * L[k * m + p];
            if (i == k) {
                const HighPrecision& diag_entry = s.values[2 * i];
                if (!(acc > pivot_tolerance * abs(diag_entry)) || !(acc > 0))
                    fail(ErrorKind::ill_conditioned_moments,
                         "Hankel matrix numerically singular at size " + std::to_string(i + 1));
                L[i * m + i] = sqrt(acc);
            } else {
                L[i * m + k] = acc / L[k * m + k];
            }
        }
    }
    auto r = [&](std::size_t a, std::size_t b) -> const HighPrecision& { return L[b * m + a]; };  // upper factor
    JacobiParameters j;
    j.mass = static_cast<double>(s.values[0]);
    for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
        HighPrecision alpha = r(k, k + 1) / r(k, k);
        if (k > 0) alpha -= r(k - 1, k) / r(k - 1, k - 1);
        j.diag.push_back(static_cast<double>(alpha));
        j.offdiag.push_back(static_cast<double>(r(k + 1, k + 1) / r(k, k)));
    }
    return j;
}

MomentSequence jacobi_to_moments(const JacobiParameters& j, Index n) {
    if (n < 0) fail(ErrorKind::precondition, "moment degree must be non-negative");
    require_size(j, n, "moments");
    j.validate();
    const auto m = static_cast<std::size_t>(n + 1);
    // Jacobi matrix rows 0..n: diagonal q_1..q_{n+1}; q_{n+1} never reaches s_0..s_{2n}.
    auto q_of = [&](std::size_t i) { return i < static_cast<std::size_t>(n) ? HighPrecision(j.diag[i]) : HighPrecision(0); };
    auto r_of = [&](std::size_t i) { return HighPrecision(j.offdiag[i]); };
    auto apply = [&](const std::vector<HighPrecision>& v) {
        std::vector<HighPrecision> w(m, HighPrecision(0));
        for (std::size_t i = 0; i < m; ++i) {
            HighPrecision acc = q_of(i) * v[i];
            if (i > 0) acc += r_of(i - 1) * v[i - 1];
            if (i + 1 < m) acc += r_of(i) * v[i + 1];
            w[i] = acc;
        }
        return w;
    };
    auto dot = [&](const std::vector<HighPrecision>& a, const std::vector<HighPrecision>& b) {
        HighPrecision acc = 0;
        for (std::size_t i = 0; i < m; ++i) acc += a[i] * b[i];
        return acc;
    };
    MomentSequence out;
    out.values.resize(2 * m - 1);
    const HighPrecision mass(j.mass);
    std::vector<HighPrecision> v(m, HighPrecision(0));
    v[0] = 1;
    for (std::size_t k = 0; k <= static_cast<std::size_t>(n); ++k) {
        // v = J^k e_0, supported on 0..k, so the truncation to rows 0..n is exact.
        out.values[2 * k] = mass * dot(v, v);
        if (k < static_cast<std::size_t>(n)) {
            auto w = apply(v);
            out.values[2 * k + 1] = mass * dot(v, w);
            v = std::move(w);
        }
    }
    out.normalized = j.mass == 1.0;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// cot with odd multiples of pi/2 (as doubles) mapped to an exact zero.
double cot(double d) {
    if (std::fabs(std::remainder(d, std::numbers::pi)) == std::numbers::pi / 2) return 0.0;
    return 1.0 / std::tan(d);
}

}  // namespace

double diagonal_from_angles(double length, double phi_prev, double phi, double phi_next) {
    return -(cot(phi_next - phi) + cot(phi - phi_prev)) / length;
}

namespace {

JacobiParameters jacobi_from_parts(const std::vector<double>& l, const std::vector<double>& d) {
    // l has N+1 entries, d[i] = phi_{i+2} - phi_{i+1} has N entries.
    const std::size_t n = d.size();
    JacobiParameters j;
    j.mass = 1.0 / l[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::fabs(std::sin(d[i]));
        if (!(s > 0.0)) fail(ErrorKind::invalid_hamiltonian, "consecutive angles agree mod pi at n = " + std::to_string(i + 1));
        j.offdiag.push_back(1.0 / (s * std::sqrt(l[i] * l[i + 1])));
        double cot_sum = cot(d[i]);
        if (i > 0) cot_sum += cot(d[i - 1]);
        j.diag.push_back(-cot_sum / l[i]);
    }
    return j;
}

}  // namespace

JacobiParameters jacobi_from_hamiltonian(const HamburgerHamiltonian& h, Index n) {
    if (n < 1) fail(ErrorKind::precondition, "need N >= 1");
    const auto l = h.lengths.materialize(1, n + 1);
    for (std::size_t i = 0; i < l.size(); ++i)
        if (!(l[i] > 0.0)) fail(ErrorKind::invalid_hamiltonian, "length l_" + std::to_string(i + 1) + " is not positive");
    sin_diffs(h, 1, n);  // angle invariant
    return jacobi_from_parts(l, h.angles.differences(1, n));
}

JacobiParameters jacobi_from_hamiltonian(const FiniteRankHamiltonian& h) {
    h.validate();
    if (h.size() < 2) fail(ErrorKind::precondition, "need at least two intervals");
    std::vector<double> d;
    for (std::size_t i = 0; i + 1 < h.size(); ++i) d.push_back(h.angles[i + 1] - h.angles[i]);
    return jacobi_from_parts(h.lengths, d);
}

FiniteRankHamiltonian hamiltonian_from_jacobi(const JacobiParameters& j, Index n) {
    if (n < 2) fail(ErrorKind::precondition, "need N >= 2 intervals");
    require_size(j, n - 1, "Hamiltonian from Jacobi data");
    const auto t = polynomial_tables(j, n - 1, false);
    FiniteRankHamiltonian h;
    for (Index k = 0; k < n; ++k) {
        const double p = t.p_at_zero[static_cast<std::size_t>(k)];
        const double q = t.q_at_zero[static_cast<std::size_t>(k)];
        h.lengths.push_back(p * p + q * q);
        h.angles.push_back(reduce_angle(std::atan2(q, p)));
    }
    if (!std::all_of(h.lengths.begin(), h.lengths.end(), [](double v) { return v > 0.0 && std::isfinite(v); }))
        fail(ErrorKind::numeric, "recovered lengths overflow or vanish");

    const auto back = jacobi_from_hamiltonian(h);
    for (Index k = 1; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        const double row = std::max({std::fabs(j.diag[i]), j.offdiag[i], k > 1 ? j.offdiag[i - 1] : 0.0});
        const double er = std::fabs(back.offdiag[i] - j.offdiag[i]) / j.offdiag[i];
        const double eq = std::fabs(back.diag[i] - j.diag[i]) / row;
        if (er > roundtrip_tolerance || eq > roundtrip_tolerance)
            fail(ErrorKind::numeric, "convention mismatch: round trip residual " + fmt_sci(std::max(er, eq)) +
                                         " at n = " + std::to_string(k));
    }
    return h;
}

// ---------------------------------------------------------------------------

LivsicEstimate livsic_value(const NLogNRatio& r) {
    return {2.0 / r.corrected, 2.0 / r.raw, std::fabs(2.0 / r.corrected - 2.0 / (r.corrected + r.drift))};
}

LivsicEstimate leading_value(const NLogNRatio& r) {
    return {1.0 / r.corrected, 1.0 / r.raw, std::fabs(1.0 / r.corrected - 1.0 / (r.corrected + r.drift))};
}

LivsicReport livsic_bounds(const std::vector<double>& log_even_moments, const std::vector<double>& log_leading,
                           Index horizon) {
    if (horizon < 16) fail(ErrorKind::insufficient_data, "Livsic estimates need horizon >= 16");
    LivsicReport rep;
    rep.horizon = horizon;
    const auto need = static_cast<std::size_t>(horizon + 1);
    if (!log_even_moments.empty()) {
        if (log_even_moments.size() < need) fail(ErrorKind::precondition, "too few moments for the horizon");
        std::vector<double> B(log_even_moments.begin() + 1, log_even_moments.begin() + static_cast<long>(need));
        for (std::size_t i = B.size() / 2; i < B.size(); ++i)
            if (!(B[i] > 0.0) || !std::isfinite(B[i]))
                fail(ErrorKind::domain, "ln s_{2n} is not positive in the tail window");
        rep.livsic = nlogn_ratio(B, Extreme::min);
        if (!(rep.livsic->corrected > 0.0)) fail(ErrorKind::domain, "even moments do not grow");
    }
    if (!log_leading.empty()) {
        if (log_leading.size() < need) fail(ErrorKind::precondition, "too few leading coefficients for the horizon");
        std::vector<double> B;
        B.reserve(need - 1);
        for (std::size_t i = 1; i < need; ++i) B.push_back(-log_leading[i]);
        for (std::size_t i = B.size() / 2; i < B.size(); ++i)
            if (!(B[i] > 0.0) || !std::isfinite(B[i]))
                fail(ErrorKind::domain, "ln(1/b_{n,n}) is not positive in the tail window");
        rep.leading = nlogn_ratio(B, Extreme::min);
        if (!(rep.leading->corrected > 0.0)) fail(ErrorKind::domain, "leading coefficients do not decay");
    }
    if (!log_even_moments.empty() && !log_leading.empty()) {
        rep.m62_min = leading_moment_product(log_even_moments, log_leading, horizon);
        rep.m62_holds = *rep.m62_min >= 1.0 - 1e-10;
    }
    return rep;
}

double leading_moment_product(const std::vector<double>& log_even_moments, const std::vector<double>& log_leading,
                              Index horizon) {
    const auto need = static_cast<std::size_t>(horizon + 1);
    if (horizon < 0 || log_even_moments.size() < need || log_leading.size() < need)
        fail(ErrorKind::precondition, "too few moments or leading coefficients for the horizon");
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < need; ++i) worst = std::min(worst, log_leading[i] + 0.5 * log_even_moments[i]);
    return std::exp(worst);
}

namespace {

std::vector<double> log_even(const MomentSequence& s, Index horizon) {
    if (s.degree() < horizon) fail(ErrorKind::precondition, "moment sequence shorter than the horizon");
    std::vector<double> out;
    for (Index n = 0; n <= horizon; ++n) {
        const HighPrecision& v = s.values[static_cast<std::size_t>(2 * n)];
        if (!(v > 0)) fail(ErrorKind::domain, "s_{2n} is not positive at n = " + std::to_string(n));
        out.push_back(static_cast<double>(log(v)));
    }
    return out;
}

std::vector<double> leading_prefix(const PolynomialTable& t, Index horizon) {
    if (t.degree < horizon) fail(ErrorKind::precondition, "polynomial table shorter than the horizon");
    return {t.log_leading.begin(), t.log_leading.begin() + horizon + 1};
}

}  // namespace

LivsicReport livsic_bounds(const MomentSequence& s, Index horizon) { return livsic_bounds(log_even(s, horizon), {}, horizon); }

LivsicReport livsic_bounds(const PolynomialTable& t, Index horizon) {
    return livsic_bounds({}, leading_prefix(t, horizon), horizon);
}

LivsicReport livsic_bounds(const MomentSequence& s, const PolynomialTable& t, Index horizon) {
    return livsic_bounds(log_even(s, horizon), leading_prefix(t, horizon), horizon);
}

double leading_moment_product(const MomentSequence& s, const PolynomialTable& t, Index horizon) {
    return leading_moment_product(log_even(s, horizon), leading_prefix(t, horizon), horizon);
}

CoefficientOrder order_from_coefficients(const PolynomialTable& t, Index k_from, Index k_to, bool leading_only) {
    if (!t.has_coefficients) fail(ErrorKind::precondition, "polynomial table was built without coefficients");
    k_from = std::max<Index>(k_from, 2);
    k_to = std::min(k_to, t.degree);
    if (k_to < k_from) fail(ErrorKind::insufficient_data, "empty k-range");
    CoefficientOrder out;
    out.truncation = t.degree;
    out.estimate = -std::numeric_limits<double>::infinity();
    for (Index k = k_from; k <= k_to; ++k) {
        double log_sum = -std::numeric_limits<double>::infinity();
        const Index last = leading_only ? k : t.degree;
        for (Index n = k; n <= last; ++n) {
            const LogValue& b = t.first[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
            if (!b.is_zero()) log_sum = log_add(log_sum, 2.0 * b.log_abs);
        }
        if (!std::isfinite(log_sum)) fail(ErrorKind::numeric, "tail sum vanished in log domain at k = " + std::to_string(k));
        const double kk = static_cast<double>(k);
        const double v = -2.0 * kk * std::log(kk) / log_sum;
        out.per_k.emplace_back(k, v);
        if (v > out.estimate) {
            out.estimate = v;
            out.argmax_k = k;
        }
    }
    const std::size_t half = out.per_k.size() / 2;
    if (half >= 1) {
        double lo = -std::numeric_limits<double>::infinity(), hi = lo;
        for (std::size_t i = 0; i < out.per_k.size(); ++i)
            (i < half ? lo : hi) = std::max(i < half ? lo : hi, out.per_k[i].second);
        out.stabilized = std::fabs(hi - lo) < 0.02 && out.estimate > 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------

nlohmann::json log_value_json(LogValue v) {
    if (v.is_zero()) return {{"mantissa", 0.0}, {"log10", 0}};
    const double l10 = v.log_abs / std::numbers::ln10;
    const double e = std::floor(l10);
    return {{"mantissa", v.sign * std::pow(10.0, l10 - e)}, {"log10", static_cast<long long>(e)}};
}

nlohmann::json to_json(const JacobiParameters& j) {
    return {{"kind", "jacobi"}, {"horizon", j.size()}, {"mass", j.mass}, {"offdiag", j.offdiag}, {"diag", j.diag}};
}

JacobiParameters jacobi_from_json(const nlohmann::json& js) {
    if (!js.is_object() || !js.contains("offdiag") || !js.contains("diag"))
        fail(ErrorKind::validation, "Jacobi parameters need \"offdiag\" and \"diag\"");
    JacobiParameters j;
    try {
        j.offdiag = js.at("offdiag").get<std::vector<double>>();
        j.diag = js.at("diag").get<std::vector<double>>();
        if (js.contains("mass")) j.mass = js.at("mass").get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::validation, std::string("Jacobi parameters: ") + e.what());
    }
    j.validate();
    return j;
}

nlohmann::json to_json(const MomentSequence& s) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& v : s.values) values.push_back(v.str(40, std::ios_base::scientific));
    return {{"kind", "moments"}, {"normalized", s.normalized}, {"horizon", s.degree()}, {"values", values}};
}

MomentSequence moments_from_json(const nlohmann::json& js) {
    const nlohmann::json* arr = &js;
    if (js.is_object()) {
        if (!js.contains("values")) fail(ErrorKind::validation, "moment object needs \"values\"");
        arr = &js.at("values");
    }
    if (!arr->is_array() || arr->empty() || arr->size() % 2 == 0)
        fail(ErrorKind::validation, "moments must be an array s_0..s_{2N} of odd length");
    MomentSequence s;
    for (const auto& v : *arr) {
        if (v.is_number()) {
            s.values.emplace_back(v.get<double>());
        } else if (v.is_string()) {
            try {
                s.values.emplace_back(v.get<std::string>());
            } catch (const std::exception&) {
                fail(ErrorKind::validation, "moment \"" + v.get<std::string>() + "\" is not a number");
            }
        } else {
            fail(ErrorKind::validation, "moment entries must be numbers or decimal strings");
        }
    }
    s.normalized = s.values[0] == 1;
    return s;
}

nlohmann::json to_json(const PolynomialTable& t) {
    nlohmann::json lead = nlohmann::json::array();
    for (double l : t.log_leading) lead.push_back(log_value_json({1, l}));
    nlohmann::json out{{"kind", "polynomials"},
                       {"degree", t.degree},
                       {"mass", t.mass},
                       {"p_at_zero", t.p_at_zero},
                       {"q_at_zero", t.q_at_zero},
                       {"leading", lead}};
    if (t.has_coefficients) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : t.first) {
            nlohmann::json r = nlohmann::json::array();
            for (const auto& v : row) r.push_back(log_value_json(v));
            rows.push_back(r);
        }
        out["coefficients"] = rows;
    }
    return out;
}

}  // namespace canon
