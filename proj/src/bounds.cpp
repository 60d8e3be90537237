#include "canon/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "canon/error.hpp"
#include "canon/fit.hpp"

namespace canon {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Closed-form values compare exactly, estimates within the tolerance.
bool near(const IndexValue& v, double target, double tol) {
    if (v.value.is_infinite()) return false;
    return std::fabs(v.value.value() - target) <= (v.closed_form ? 1e-12 : tol);
}

UpperBound bound_from(const IndexValue& dlp, const IndexValue& dphi, const IndexValue& lambda, double tol,
                      const char* names) {
    UpperBound b;
    if (near(dlp, 1.0, tol) && near(dphi, 1.0, tol) && near(lambda, 0.0, tol)) {
        b.value = 1.0;
        b.applicable = false;
        b.note = std::string("excluded case ") + names + " = (1, 1, 0): trivial bound only";
        return b;
    }
    const Extended sum = dlp.value + dphi.value;
    if (sum.is_infinite() || sum.value() >= 2.0) {
        b.region = Region::generic;
        b.value = reciprocal(sum).value();
        return b;
    }
    b.region = Region::critical;
    const double x = dlp.value.value(), y = dphi.value.value();
    Extended z = lambda.value;
    if (z.is_finite() && y > z.value() + 1.0) {
        // The indices always satisfy Delta_phi - 1 <= Lambda; a violation is estimation error.
        if (y - z.value() - 1.0 <= tol && !(dphi.closed_form && lambda.closed_form)) {
            z = y - 1.0;
            b.note = "Lambda raised to Delta_phi - 1 to stay in the domain of g";
        } else {
            b.value = 1.0;
            b.applicable = false;
            b.note = "indices violate Delta_phi - 1 <= Lambda; trivial bound only";
            return b;
        }
    }
    b.value = std::max(1.0 / (x + y), g_value(x, y, z));
    return b;
}

double log_weight_ratio(double a, double b) { return std::fabs(std::log(a) - std::log(b)) / 2; }

// Tail sum of l_j |sin(phi_j - phi)| over j > N, summed to J and continued beyond J with the mean
// |sin| weight of the last octave.
double weighted_tail(const HamburgerHamiltonian& h, double phi, Index N, Index J) {
    SequenceCursor lc(h.lengths);
    AngleCursor ac(h.angles);
    long double t = 0.0L, w_oct = 0.0L, l_oct = 0.0L;
    for (Index j = N + 1; j <= J; ++j) {
        const double l = lc.advance_to(j);
        const long double w = l * std::fabs(std::sin(ac.advance_to(j) - phi));
        t += w;
        if (j > J / 2) {
            w_oct += w;
            l_oct += l;
        }
    }
    if (auto rest = length_tail(h, J); rest && rest->is_finite() && l_oct > 0)
        t += static_cast<long double>(rest->value()) * (w_oct / l_oct);
    return static_cast<double>(t);
}

double length_after(const HamburgerHamiltonian& h, Index N) {
    if (auto t = length_tail(h, N); t && t->is_finite()) return t->value();
    const auto c = classify_limit(h, std::max<Index>(64 * N, 1'000'000), 1e-10);
    if (c.kind != LimitKind::limit_circle || !c.total_length)
        fail(ErrorKind::precondition, "the plan needs a limit circle Hamiltonian with known total length");
    return *c.total_length - nodes(h, N);
}

nlohmann::json slope_json(double e) {
    if (std::isinf(e)) return e < 0 ? "-inf" : "inf";
    return e;
}

}  // namespace

double g_value(double x, double y, Extended z) {
    if (!(x >= 1.0)) fail(ErrorKind::domain, "g(x, y, z) needs x >= 1, got x = " + num(x));
    if (!(y >= 0.0)) fail(ErrorKind::domain, "g(x, y, z) needs y >= 0, got y = " + num(y));
    if (z.is_infinite()) return 0.5;
    const double zv = z.value();
    if (!(zv >= 0.0)) fail(ErrorKind::domain, "g(x, y, z) needs z >= 0, got z = " + num(zv));
    if (!(y <= zv + 1.0)) fail(ErrorKind::domain, "g(x, y, z) needs y <= z + 1, got y = " + num(y) + ", z = " + num(zv));
    const double den = x - y + zv;
    if (!(den > 0.0)) fail(ErrorKind::domain, "g(x, y, z) needs x - y + z > 0, got " + num(den));
    return (1.0 - y + zv / 2) / den;
}

UpperBounds upper_bound(const HamiltonianIndices& idx, const BoundsOptions& opt) {
    UpperBounds out;
    out.m2 = bound_from(idx.Delta_l_plus, idx.Delta_phi, idx.Lambda, opt.tolerance, "(Delta_l^+, Delta_phi, Lambda)");
    out.m81 = bound_from(idx.Delta_l_plus, idx.Delta_phi_star, idx.Lambda_star, opt.tolerance,
                         "(Delta_l^+, Delta_phi^*, Lambda^*)");
    out.r27 = idx.convergence_exponent.value.value_or(1.0);
    return out;
}

LowerBounds lower_bound(const HamiltonianIndices& idx) {
    LowerBounds out;
    out.r2 = reciprocal(idx.delta_l_phi.value);
    out.r52 = reciprocal(idx.delta_l.value + idx.delta_phi.value);
    out.r52_applicable = idx.delta_l_is_limit || idx.delta_phi_is_limit;
    return out;
}

OrderFormula order_formula_r24(const HamiltonianIndices& idx, const BoundsOptions& opt) {
    OrderFormula out;
    if (idx.lengths_regularity != Regularity::regular) {
        out.reason = std::string("lengths are not regularly distributed (") + regularity_name(idx.lengths_regularity) + ")";
        return out;
    }
    if (!idx.delta_l_is_limit && !idx.delta_phi_is_limit) {
        out.reason = "neither delta_l nor delta_phi exists as a limit";
        return out;
    }
    const Extended sum = idx.delta_l.value + idx.delta_phi.value;
    if (near(idx.delta_phi, 0.0, opt.tolerance)) {
        out.which = R24Case::B;
        out.value = reciprocal(idx.delta_l.value).value();
        out.reason = "delta_phi = 0";
        return out;
    }
    if (idx.sin_regularity != Regularity::regular) {
        out.reason = std::string("angle differences are not regularly distributed (") +
                     regularity_name(idx.sin_regularity) + ")";
        return out;
    }
    const bool exact = idx.delta_l.closed_form && idx.delta_phi.closed_form;
    if (sum.is_finite() && sum.value() < 2.0 - (exact ? 0.0 : opt.tolerance)) {
        out.reason = "delta_l + delta_phi < 2";
        return out;
    }
    if (near(idx.delta_l, 1.0, opt.tolerance) && near(idx.delta_phi, 1.0, opt.tolerance) &&
        near(idx.Lambda, 0.0, opt.tolerance)) {
        out.reason = "excluded case (delta_l, delta_phi, Lambda) = (1, 1, 0)";
        return out;
    }
    out.which = R24Case::A;
    out.value = reciprocal(sum).value();
    out.reason = "regular angle differences, delta_l + delta_phi >= 2";
    return out;
}

BoundsReport bounds_report(const HamiltonianIndices& idx, const BoundsOptions& opt) {
    return {upper_bound(idx, opt), lower_bound(idx), order_formula_r24(idx, opt)};
}

PlanSurrogates plan_surrogates(const HamburgerHamiltonian& h, const HamiltonianIndices& idx, double phi,
                               const PlanOptions& opt) {
    PlanSurrogates s;
    s.Delta_l = idx.Delta_l.value.value_or(opt.surrogate_cap);
    s.Delta_l_plus = std::max(1.0, s.Delta_l);
    s.Delta_phi_capped = idx.Delta_phi.value.is_infinite();
    s.Delta_phi = idx.Delta_phi.value.value_or(opt.surrogate_cap);
    Extended lambda;
    if (auto c = lambda_closed_at(h, phi)) {
        lambda = *c;
    } else {
        lambda = lambda_at(h, phi, opt.lambda_horizon, Extended(s.Delta_l_plus));
    }
    s.Lambda_capped = lambda.is_infinite();
    s.Lambda_phi = lambda.value_or(opt.surrogate_cap);
    return s;
}

double target_order_bound(const PlanSurrogates& s) {
    const double x = s.Delta_l_plus, y = s.Delta_phi;
    if (x + y >= 2.0) return 1.0 / (x + y);
    return std::max(1.0 / (x + y), g_value(x, y, s.Lambda_phi));
}

M2PlanResult build_m2_plan(const HamburgerHamiltonian& h, const PlanSurrogates& s, double phi, double d, double R,
                           const PlanOptions& opt) {
    if (s.Delta_l_plus == 1.0 && s.Lambda_phi == 0.0)
        fail(ErrorKind::inapplicable, "no plan when (Delta_l^+, Lambda(phi)') = (1, 0)");
    if (!(R > 1.0)) fail(ErrorKind::precondition, "plan needs R > 1, got " + num(R));
    if (!(d > 0.0 && d < 1.0)) fail(ErrorKind::invalid_target_order, "target order must lie in (0, 1), got " + num(d));
    if (opt.check_target_order) {
        const double lo = target_order_bound(s);
        if (!(d > lo))
            fail(ErrorKind::invalid_target_order,
                 "target order " + num(d) + " does not exceed the bound " + num(lo) + " for these surrogates");
    }
    M2PlanResult out;
    auto& p = out.plan;
    p.R = R;
    p.phi = phi;
    p.d = d;
    p.surrogates = s;
    p.sigma = 1.0 / (s.Delta_l_plus + s.Delta_phi);
    const double expo = (1.0 - d) / (s.Delta_l_plus - 1.0 + s.Lambda_phi / 2);
    const double Nreal = std::exp(expo * std::log(R));
    if (Nreal > 5e7) fail(ErrorKind::cap_exceeded, "cut-off N(R) = " + num(Nreal) + " exceeds 5e7 intervals");
    p.N = static_cast<Index>(std::floor(Nreal * (1.0 + 1e-12)));
    if (p.N < 1) fail(ErrorKind::insufficient_data, "R = " + num(R) + " gives an empty cut-off");

    const double lnR = std::log(R), Rs = std::exp(p.sigma * lnR);
    p.weights_sq.resize(static_cast<std::size_t>(p.N + 1));
    for (Index n = 1; n <= p.N; ++n) {
        const double ln_n = std::log(static_cast<double>(n));
        const double lw = static_cast<double>(n) <= Rs ? s.Delta_l * ln_n - lnR
                                                        : (s.Delta_l_plus - s.Delta_phi) / 2 * ln_n - lnR / 2;
        p.weights_sq[static_cast<std::size_t>(n - 1)] = std::exp(lw);
    }
    p.weights_sq.back() = std::exp(-s.Lambda_phi / 2 * std::log(static_cast<double>(p.N)));
    for (Index n = 1; n <= p.N + 1; ++n) {
        const double w = p.weights_sq[static_cast<std::size_t>(n - 1)];
        if (w > 1.0 + 1e-12) {
            std::string why;
            if (s.Delta_l_plus > s.Delta_phi)
                why = ": (1 - Delta_phi' - Lambda(phi)'/2) / (Delta_l^+ - Delta_phi') = " +
                      num((1 - s.Delta_phi - s.Lambda_phi / 2) / (s.Delta_l_plus - s.Delta_phi)) + " exceeds d = " + num(d);
            fail(ErrorKind::weight_overflow, "a_n(R)^2 = " + num(w) + " > 1 at n = " + std::to_string(n) + why);
        }
    }

    auto& H = out.hamiltonian;
    H.lengths = h.lengths.materialize(1, p.N);
    H.angles.resize(static_cast<std::size_t>(p.N));
    AngleCursor ac(h.angles);
    for (Index n = 1; n <= p.N; ++n) H.angles[static_cast<std::size_t>(n - 1)] = ac.advance_to(n);
    H.lengths.push_back(length_after(h, p.N));
    H.angles.push_back(phi);
    return out;
}

Certificate certify_m29(const HamburgerHamiltonian& h, const PlanSurrogates& s, double phi, double d,
                        const CertificateOptions& opt) {
    std::vector<double> grid = opt.R_grid;
    if (grid.empty())
        for (int k = 0; k < 8; ++k) grid.push_back(std::pow(10.0, 6.0 + 12.0 * k / 7));
    if (grid.size() < 6) fail(ErrorKind::precondition, "certificate needs an R-grid of at least 6 points");
    const double ratio = grid[1] / grid[0];
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1]) || std::fabs(grid[k] / grid[k - 1] / ratio - 1.0) > 1e-6)
            fail(ErrorKind::precondition, "certificate R-grid must be increasing and geometric");

    Certificate c;
    c.d = d;
    c.phi = phi;
    c.surrogates = s;
    PlanOptions popt;
    popt.check_target_order = false;
    for (double R : grid) {
        const auto plan = build_m2_plan(h, s, phi, d, R, popt);
        const auto& w = plan.plan.weights_sq;
        const auto& H = plan.hamiltonian;
        const Index N = plan.plan.N;
        CertificatePoint pt;
        pt.R = R;
        pt.N = N;
        // (i): the plans agree with H up to x_N; on the last interval the spectral norm of the
        // difference of the projections onto xi_{phi_j} and xi_phi is |sin(phi_j - phi)|.
        pt.sums[0] = weighted_tail(h, phi, N, opt.tail_factor * N) / w.back();
        long double ii = 0.0L, iii = 0.0L, iv = 0.0L;
        for (std::size_t k = 0; k < w.size(); ++k) ii += static_cast<long double>(w[k]) * H.lengths[k];
        for (std::size_t k = 0; k + 1 < w.size(); ++k) {
            iii += std::log1p(std::fabs(std::sin(H.angles[k + 1] - H.angles[k])) / std::sqrt(w[k] * w[k + 1]));
            iv += log_weight_ratio(w[k + 1], w[k]);
        }
        iv += std::fabs(std::log(w.front())) / 2 + std::fabs(std::log(w.back())) / 2;
        pt.sums[1] = static_cast<double>(ii);
        pt.sums[2] = static_cast<double>(iii);
        pt.sums[3] = static_cast<double>(iv);
        c.points.push_back(pt);
    }
    double e[4];
    std::vector<double> x;
    for (const auto& p : c.points) x.push_back(std::log(p.R));
    for (int i = 0; i < 4; ++i) {
        std::vector<double> y;
        bool zero = false;
        for (const auto& p : c.points) {
            zero = zero || !(p.sums[i] > 0.0);
            y.push_back(std::log(p.sums[i]));
        }
        e[i] = zero ? -std::numeric_limits<double>::infinity() : fit_slope(x, y, false).slope;
    }
    c.e_i = e[0];
    c.e_ii = e[1];
    c.e_iii = e[2];
    c.e_iv = e[3];
    c.pass_i = c.e_i <= d - 1 + opt.tolerance;
    c.pass_ii = c.e_ii <= d - 1 + opt.tolerance;
    c.pass_iii = c.e_iii <= d + opt.tolerance;
    c.pass_iv = c.e_iv <= d + opt.tolerance;
    c.pass = c.pass_i && c.pass_ii && c.pass_iii && c.pass_iv;
    return c;
}

const char* region_name(Region r) noexcept { return r == Region::generic ? "generic" : "critical"; }

const char* r24_case_name(R24Case c) noexcept {
    switch (c) {
        case R24Case::A: return "A";
        case R24Case::B: return "B";
        case R24Case::none: break;
    }
    return "none";
}

nlohmann::json to_json(const UpperBound& b) {
    return {{"value", b.value}, {"region", region_name(b.region)}, {"applicable", b.applicable}, {"note", b.note}};
}

nlohmann::json to_json(const BoundsReport& r) {
    nlohmann::json j;
    j["upperM2"] = to_json(r.upper.m2);
    j["upperM81"] = to_json(r.upper.m81);
    j["upperR27"] = r.upper.r27;
    j["lowerR2"] = extended_json(r.lower.r2);
    j["lowerR52"] = {{"value", extended_json(r.lower.r52)}, {"applicable", r.lower.r52_applicable}};
    j["orderR24"] = {{"value", r.r24.value ? nlohmann::json(*r.r24.value) : nlohmann::json(nullptr)},
                     {"case", r24_case_name(r.r24.which)},
                     {"reason", r.r24.reason}};
    return j;
}

nlohmann::json to_json(const PlanSurrogates& s) {
    return {{"DeltaL", s.Delta_l},           {"DeltaLPlus", s.Delta_l_plus},   {"DeltaPhi", s.Delta_phi},
            {"LambdaPhi", s.Lambda_phi},     {"DeltaPhiCapped", s.Delta_phi_capped}, {"LambdaCapped", s.Lambda_capped}};
}

nlohmann::json to_json(const M2Plan& p) {
    return {{"R", p.R},         {"N", p.N},       {"phi", p.phi},
            {"d", p.d},         {"sigma", p.sigma}, {"surrogates", to_json(p.surrogates)},
            {"weightsSquared", p.weights_sq}};
}

nlohmann::json to_json(const Certificate& c) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : c.points)
        pts.push_back({{"R", p.R}, {"N", p.N}, {"sums", {p.sums[0], p.sums[1], p.sums[2], p.sums[3]}}});
    return {{"d", c.d},
            {"phi", c.phi},
            {"surrogates", to_json(c.surrogates)},
            {"exponents", {{"i", slope_json(c.e_i)}, {"ii", slope_json(c.e_ii)}, {"iii", slope_json(c.e_iii)}, {"iv", slope_json(c.e_iv)}}},
            {"targets", {{"i", c.d - 1}, {"ii", c.d - 1}, {"iii", c.d}, {"iv", c.d}}},
            {"passed", {{"i", c.pass_i}, {"ii", c.pass_ii}, {"iii", c.pass_iii}, {"iv", c.pass_iv}}},
            {"pass", c.pass},
            {"points", pts}};
}

}  // namespace canon
