#include "canon/indices.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "canon/error.hpp"
#include "canon/fit.hpp"

namespace canon {

namespace {

using std::numbers::pi;

std::vector<double> log_values(const std::vector<double>& y, Index count) {
    if (static_cast<Index>(y.size()) < count) fail(ErrorKind::precondition, "sequence shorter than the horizon");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (Index k = 0; k < count; ++k) {
        const double v = y[static_cast<std::size_t>(k)];
        if (!(v > 0.0) || !std::isfinite(v))
            fail(ErrorKind::precondition, "y_" + std::to_string(k + 1) + " is not a positive finite number");
        out[static_cast<std::size_t>(k)] = std::log(v);
    }
    return out;
}

struct Point {
    double n;
    double log_value;  // -inf for an exact zero
};

struct ExponentFit {
    Extended exponent;
    double drift = 0.0;
    bool oscillating = false;
};

// Decay exponent of the points: -ln v regressed on {ln n, 1}, adding ln ln n and then 1/n only
// while the smaller model leaves a visible residual. Data that no model fits (oscillation in
// ln n) keep the plain power fit, which cannot trade the slope against the log column.
constexpr double fit_residual_limit = 1e-3;

double regress_exponent(const std::vector<Point>& pts, bool* oscillating = nullptr) {
    std::vector<double> x, y, lx, inv;
    for (const auto& p : pts) {
        x.push_back(std::log(p.n));
        y.push_back(-p.log_value);
        lx.push_back(std::log(x.back()));
        inv.push_back(1.0 / p.n);
    }
    const std::vector<double> one(x.size(), 1.0);
    const auto plain = least_squares({x, one}, y);
    if (oscillating) *oscillating = false;
    if (plain.residual_rms <= fit_residual_limit || pts.size() < 4) return plain.coef[0];
    const auto logged = least_squares({x, lx, one}, y);
    if (logged.residual_rms <= fit_residual_limit) return logged.coef[0];
    if (pts.size() >= 6) {
        const auto full = least_squares({x, lx, one, inv}, y);
        if (full.residual_rms <= fit_residual_limit) return full.coef[0];
    }
    if (oscillating) *oscillating = true;
    return plain.coef[0];
}

// Local slope of -ln v against ln n between two points.
double local_slope(const Point& a, const Point& b) {
    return -(b.log_value - a.log_value) / (std::log(b.n) - std::log(a.n));
}

// Exponent of points sampled along n (increasing), fitted over [sqrt(N), N], with the fit over
// the window two octaves lower as the drift reference.
ExponentFit tail_exponent(const std::vector<Point>& pts, double N, double infinity_threshold) {
    ExponentFit out;
    std::vector<Point> tail, lower;
    const double lo = std::sqrt(N);
    for (const auto& p : pts) {
        if (p.n >= lo) tail.push_back(p);
        if (p.n >= lo / 4 && p.n <= N / 4) lower.push_back(p);
    }
    if (tail.size() < 3) {
        tail.clear();
        for (const auto& p : pts)
            if (p.n >= 4) tail.push_back(p);
    }
    if (tail.size() < 2) fail(ErrorKind::insufficient_data, "too few sample points for an exponent fit");
    for (const auto& p : tail)
        if (std::isinf(p.log_value)) {
            out.exponent = Extended::infinity();
            return out;
        }
    // Super-polynomial decay: the local slope keeps doubling.
    const std::size_t m = tail.size();
    if (m >= 5) {
        const double last = local_slope(tail[m - 3], tail[m - 1]);
        const double before = local_slope(tail[m - 5], tail[m - 3]);
        if (last > 4.0 && before > 0.0 && last > 1.5 * before) {
            out.exponent = Extended::infinity();
            return out;
        }
    }
    const double e = regress_exponent(tail, &out.oscillating);
    if (e > infinity_threshold) {
        out.exponent = Extended::infinity();
        return out;
    }
    out.exponent = e;
    if (lower.size() >= 3) {
        bool finite = true;
        for (const auto& p : lower) finite = finite && std::isfinite(p.log_value);
        if (finite) out.drift = std::fabs(e - regress_exponent(lower));
    }
    return out;
}

// Blockwise candidates (one per dyadic octave) reduced to the slowest-decaying point of every
// sliding window of w octaves.
std::vector<Point> envelope(const std::vector<Point>& octave_max, int w) {
    std::vector<Point> out;
    auto ratio = [](const Point& p) {
        return p.n > 1.0 ? -p.log_value / std::log(p.n) : std::numeric_limits<double>::infinity();
    };
    for (std::size_t j = 0; j < octave_max.size(); ++j) {
        const std::size_t a = j + 1 >= static_cast<std::size_t>(w) ? j + 1 - static_cast<std::size_t>(w) : 0;
        std::size_t best = j;
        for (std::size_t i = j; i-- > a;)
            if (ratio(octave_max[i]) < ratio(octave_max[best])) best = i;
        if (out.empty() || out.back().n < octave_max[best].n) out.push_back(octave_max[best]);
    }
    return out;
}

ExponentFit pointwise_exponent(const std::vector<double>& logy, Index N, const GrowthOptions& opt) {
    std::vector<Point> octave_max;
    for (Index start = 1; start <= N; start *= 2) {
        const Index end = std::min<Index>(2 * start - 1, N);
        Index arg = start;
        for (Index n = start + 1; n <= end; ++n)
            if (logy[static_cast<std::size_t>(n - 1)] > logy[static_cast<std::size_t>(arg - 1)]) arg = n;
        octave_max.push_back({static_cast<double>(arg), logy[static_cast<std::size_t>(arg - 1)]});
    }
    return tail_exponent(envelope(octave_max, opt.window_blocks), static_cast<double>(N), opt.infinity_threshold);
}

ExponentFit averaged_exponent(const std::vector<double>& y, Index N, const GrowthOptions& opt) {
    if (static_cast<Index>(y.size()) < 2 * N - 1)
        fail(ErrorKind::precondition, "averaged exponent needs y through 2N - 1");
    std::vector<long double> prefix(static_cast<std::size_t>(2 * N));
    long double acc = 0.0L;
    for (Index k = 1; k < 2 * N; ++k) {
        acc += y[static_cast<std::size_t>(k - 1)];
        prefix[static_cast<std::size_t>(k)] = acc;
    }
    auto avg = [&](Index n) {
        const long double s = prefix[static_cast<std::size_t>(2 * n - 1)] - prefix[static_cast<std::size_t>(n - 1)];
        return static_cast<double>(s / static_cast<long double>(n));
    };
    std::vector<Point> octave_max;
    for (int j = 0; (Index{1} << j) <= N; ++j) {
        Point best{0.0, -std::numeric_limits<double>::infinity()};
        Index last = 0;
        for (int i = 0; i < opt.averages_per_octave; ++i) {
            const auto n = static_cast<Index>(std::llround(std::exp2(j + static_cast<double>(i) / opt.averages_per_octave)));
            if (n <= last || n > N) continue;
            last = n;
            const double v = avg(n);
            const double lv = v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
            if (best.n == 0.0 || lv > best.log_value) best = {static_cast<double>(n), lv};
        }
        if (best.n > 0.0) octave_max.push_back(best);
    }
    return tail_exponent(envelope(octave_max, opt.window_blocks), static_cast<double>(N), opt.infinity_threshold);
}

// Regression misfit above which the nuisance model is taken to be wrong (log-periodic data).
constexpr double misfit_limit = 1e-4;

struct RatioPick {
    double value = 0.0;
    double drift = 0.0;
    bool fallback = false;
};

RatioPick pick(const NLogNRatio& r) {
    if (r.misfit > misfit_limit) return {r.stirling, r.stirling_drift, true};
    return {r.corrected, r.drift, false};
}

// B(n) = -(alpha ln y_n + sum_{k<n} ln y_k), n = 1..N.
std::vector<double> g_numerators(const std::vector<double>& logy, Index N, double alpha) {
    std::vector<double> B(static_cast<std::size_t>(N));
    CompensatedSum s;
    for (Index n = 1; n <= N; ++n) {
        B[static_cast<std::size_t>(n - 1)] = -(alpha * logy[static_cast<std::size_t>(n - 1)] + s.value());
        s.add(logy[static_cast<std::size_t>(n - 1)]);
    }
    return B;
}

// ----- closed forms from rule parameters -----

struct Leaf {
    double tau = 0.0;
    double kappa = 0.0;
};

struct ClassLayout {
    int modulus = 1;
    BlockIndexing indexing = BlockIndexing::residue;
    std::vector<Leaf> leaves;
};

using LeafFn = std::optional<Leaf> (*)(const SequenceRule&);

std::optional<Leaf> value_leaf(const SequenceRule& r) {
    if (auto p = std::get_if<PowerRule>(&r.rule)) {
        if (!(p->scale > 0.0) || p->tau < 0.0) return std::nullopt;
        return Leaf{p->tau, p->kappa};
    }
    if (auto c = std::get_if<ConstantRule>(&r.rule)) {
        if (!(c->value > 0.0)) return std::nullopt;
        return Leaf{};
    }
    return std::nullopt;
}

// Leaf of |sin(increment_n)|.
std::optional<Leaf> sin_leaf(const SequenceRule& r) {
    if (auto p = std::get_if<PowerRule>(&r.rule)) {
        if (p->scale == 0.0 || p->tau < 0.0) return std::nullopt;
        if (p->tau == 0.0 && p->kappa == 0.0 && std::fabs(std::sin(p->scale)) < 1e-12) return std::nullopt;
        return Leaf{p->tau, p->kappa};
    }
    if (auto c = std::get_if<ConstantRule>(&r.rule)) {
        if (std::fabs(std::sin(c->value)) < 1e-12) return std::nullopt;
        return Leaf{};
    }
    return std::nullopt;
}

std::optional<ClassLayout> layout_of(const SequenceSpec& y, LeafFn leaf) {
    if (y.empty()) return std::nullopt;
    const auto& r = y.rule();
    if (auto e = std::get_if<ExplicitRule>(&r.rule)) {
        if (!e->tail) return std::nullopt;
        return layout_of(*e->tail, leaf);
    }
    if (auto b = std::get_if<BlockRule>(&r.rule)) {
        ClassLayout out{b->modulus, b->indexing, {}};
        for (int c = 0; c < b->modulus; ++c) {
            auto it = b->classes.find(c);
            const SequenceSpec* s = it != b->classes.end() ? &it->second : (b->fallback ? &*b->fallback : nullptr);
            if (!s || s->empty()) return std::nullopt;
            auto l = leaf(s->rule());
            if (!l) return std::nullopt;
            out.leaves.push_back(*l);
        }
        return out;
    }
    auto l = leaf(r);
    if (!l) return std::nullopt;
    return ClassLayout{1, BlockIndexing::residue, {*l}};
}

// Asymptotic value of sum_{k<n} tau(k) ln k / (n ln n) along the phases m mod q of n = 2^m.
// Within a dyadic block the value is monotone in n, so the extremes sit at block ends.
std::vector<double> phase_values(const ClassLayout& c) {
    if (c.indexing == BlockIndexing::residue || c.modulus == 1) {
        double mean = 0.0;
        for (const auto& l : c.leaves) mean += l.tau;
        return {mean / static_cast<double>(c.leaves.size())};
    }
    const int q = c.modulus;
    const double norm = 1.0 - std::exp2(-q);
    std::vector<double> out;
    for (int m = 0; m < q; ++m) {
        double v = 0.0;
        for (int cls = 0; cls < q; ++cls) {
            const int k0 = ((m - cls - 1) % q + q) % q + 1;  // smallest k >= 1 with m - k = cls mod q
            v += c.leaves[static_cast<std::size_t>(cls)].tau * std::exp2(-k0) / norm;
        }
        out.push_back(v);
    }
    return out;
}

RuleProfile profile_from(const ClassLayout& c) {
    RuleProfile p;
    p.pointwise = c.leaves[0].tau;
    bool equal = true;
    for (const auto& l : c.leaves) {
        p.pointwise = std::min(p.pointwise, l.tau);
        equal = equal && l.tau == c.leaves[0].tau && l.kappa == c.leaves[0].kappa;
    }
    const auto v = phase_values(c);
    p.liminf = *std::min_element(v.begin(), v.end());
    p.limsup = *std::max_element(v.begin(), v.end());
    p.regular = equal;
    return p;
}

// Extremes of the sum of two phase functions; periods combine through their lcm.
std::pair<double, double> combined_extremes(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t L = std::lcm(a.size(), b.size());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t m = 0; m < L; ++m) {
        const double v = a[m % a.size()] + b[m % b.size()];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

const SequenceSpec* step_increment(const SequenceSpec& angles) {
    if (angles.empty()) return nullptr;
    auto s = std::get_if<StepRule>(&angles.rule().rule);
    return s ? &s->increment : nullptr;
}

std::vector<double> materialize_angles(const HamburgerHamiltonian& h, Index count) {
    AngleCursor c(h.angles);
    std::vector<double> phi(static_cast<std::size_t>(count));
    for (Index n = 1; n <= count; ++n) phi[static_cast<std::size_t>(n - 1)] = c.advance_to(n);
    return phi;
}

// The weighted tail T(n) is compared with the length tail L(n), and L(n) with n max_{[n,2n)} l:
// both ratios cancel the logarithmic corrections the tails share, which a direct power fit of
// T(n) cannot separate from the exponent at reachable horizons.
Extended lambda_from_data(const std::vector<double>& l, const std::vector<double>& phi, double angle, Index horizon,
                          double delta_l_plus, std::optional<double> length_tail_after, double infinity_threshold) {
    const auto M = static_cast<Index>(l.size());
    std::vector<long double> wtail(static_cast<std::size_t>(M + 2), 0.0L), ltail(wtail.size(), 0.0L);
    long double wsum = 0.0L, lsum = 0.0L;
    for (Index j = M; j >= 1; --j) {
        const long double lj = l[static_cast<std::size_t>(j - 1)];
        const long double w = lj * std::fabs(std::sin(phi[static_cast<std::size_t>(j - 1)] - angle));
        wtail[static_cast<std::size_t>(j)] = wtail[static_cast<std::size_t>(j + 1)] + w;
        ltail[static_cast<std::size_t>(j)] = ltail[static_cast<std::size_t>(j + 1)] + lj;
        if (j > M / 2) {
            wsum += w;
            lsum += lj;
        }
    }
    // Beyond M the tails are continued with the mean |sin| of the last octave.
    const long double after = length_tail_after ? static_cast<long double>(*length_tail_after) : 0.0L;
    const long double correction = lsum > 0 ? after * (wsum / lsum) : 0.0L;
    std::vector<Point> ratio, spread, scale;
    for (int j = 2; (Index{1} << j) <= horizon; ++j)
        for (int i = 0; i < 8; ++i) {
            const auto n = static_cast<Index>(std::llround(std::exp2(j + i / 8.0)));
            if (n > horizon || (!ratio.empty() && static_cast<double>(n) <= ratio.back().n)) continue;
            const long double t = wtail[static_cast<std::size_t>(n)] + correction;
            const long double L = ltail[static_cast<std::size_t>(n)] + after;
            const double env = *std::max_element(l.begin() + (n - 1), l.begin() + std::min<Index>(2 * n - 1, M));
            const double x = static_cast<double>(n);
            ratio.push_back({x, t > 0 ? static_cast<double>(std::log(t / L)) : -std::numeric_limits<double>::infinity()});
            spread.push_back({x, static_cast<double>(std::log(L / (x * env)))});
            scale.push_back({x, std::log(x * env)});
        }
    const double N = static_cast<double>(horizon);
    const auto fit = tail_exponent(ratio, N, infinity_threshold);
    if (fit.exponent.is_infinite()) return Extended::infinity();
    double e = fit.exponent.value();
    if (const auto sp = tail_exponent(spread, N, infinity_threshold); sp.exponent.is_finite())
        e += std::max(0.0, sp.exponent.value());
    // Lengths decaying slower than 1/n: the tail exponent of the lengths falls short of Delta_l^+ - 1 = 0.
    if (delta_l_plus <= 1.0)
        if (const auto sc = tail_exponent(scale, N, infinity_threshold); sc.exponent.is_finite())
            e += std::min(0.0, sc.exponent.value());
    return std::max(0.0, e);
}

// Smallest p <= 64 with p c = 0 mod pi.
std::optional<int> angle_period(double c) {
    for (int p = 1; p <= 64; ++p) {
        const double t = p * c / pi;
        if (std::fabs(t - std::round(t)) < 1e-9 * std::max(1.0, std::fabs(t))) return p;
    }
    return std::nullopt;
}

struct LambdaClosed {
    double lambda = 0.0;
    double lambda_star = 0.0;
};

// Rules admitting closed-form Lambda: an arithmetic-step angle rule over power-law lengths with
// min tau >= 1.
struct LambdaRule {
    const SequenceRule* increment = nullptr;
    ClassLayout lengths;
    double delta_l_plus = 1.0;
};

std::optional<LambdaRule> lambda_rule(const HamburgerHamiltonian& h, const std::optional<ClassLayout>& lengths) {
    const auto* inc = step_increment(h.angles);
    if (!inc || !lengths) return std::nullopt;
    double dl = lengths->leaves[0].tau;
    for (const auto& leaf : lengths->leaves) dl = std::min(dl, leaf.tau);
    if (dl < 1.0) return std::nullopt;
    return LambdaRule{&inc->rule(), *lengths, dl};
}

// Lambda(phi) for a constant increment c with c/pi of period p over residue-block lengths mod q:
// the joint pattern has period lcm(p, q), and at an angle of the cycle only the classes off that
// angle contribute. Angles off the cycle see every class.
double periodic_lambda(const HamburgerHamiltonian& h, const LambdaRule& r, double c, int period, double phi) {
    const int q = r.lengths.modulus;
    const int L = std::lcm(period, q);
    const double base = std::get<StepRule>(h.angles.rule().rule).base;
    double tau = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= L; ++n)
        if (std::fabs(std::sin(base + (n - 1) * c - phi)) > 1e-9)
            tau = std::min(tau, r.lengths.leaves[static_cast<std::size_t>(n % q)].tau);
    return tau - r.delta_l_plus;
}

// Power increment n^-t: the angles converge iff t > 1, at distance ~ n^{1-t}, so Lambda(phi) = t - 1
// at the limit and 0 elsewhere. Constant increment c: the angles do not converge; single-class
// lengths or irrational c/pi give Lambda(phi) = 0 throughout.
std::optional<double> lambda_closed_at_rule(const HamburgerHamiltonian& h, const LambdaRule& r, double phi) {
    const bool single = r.lengths.leaves.size() == 1;
    if (auto p = std::get_if<PowerRule>(&r.increment->rule)) {
        if (p->kappa != 0.0 || p->scale == 0.0) return std::nullopt;
        if (p->tau == 0.0) return single ? std::optional<double>(0.0) : std::nullopt;
        if (p->tau <= 1.0) return 0.0;
        const auto lim = limit_angle(h, 1024);
        if (!lim) return std::nullopt;
        return std::fabs(std::sin(phi - *lim)) < 1e-9 ? p->tau - 1.0 : 0.0;
    }
    auto c = std::get_if<ConstantRule>(&r.increment->rule);
    if (!c || std::fabs(std::sin(c->value)) < 1e-12) return std::nullopt;
    if (single) return 0.0;
    if (r.lengths.indexing != BlockIndexing::residue) return std::nullopt;
    const auto period = angle_period(c->value);
    if (!period) return 0.0;
    return periodic_lambda(h, r, c->value, *period, phi);
}

// Lambda is the supremum of Lambda(phi), attained at the limit angle or on the cycle; Lambda* is
// Lambda(limit) when the angles converge and 0 otherwise.
std::optional<LambdaClosed> lambda_closed_form(const HamburgerHamiltonian& h, const std::optional<ClassLayout>& lengths) {
    const auto r = lambda_rule(h, lengths);
    if (!r) return std::nullopt;
    std::vector<double> candidates{0.0};
    bool converges = false;
    if (auto p = std::get_if<PowerRule>(&r->increment->rule); p && p->tau > 1.0) {
        const auto lim = limit_angle(h, 1024);
        if (!lim) return std::nullopt;
        candidates = {*lim};
        converges = true;
    } else if (auto c = std::get_if<ConstantRule>(&r->increment->rule)) {
        if (const auto period = angle_period(c->value)) {
            const double base = std::get<StepRule>(h.angles.rule().rule).base;
            for (int n = 1; n <= *period; ++n) candidates.push_back(base + (n - 1) * c->value);
        }
    }
    double best = 0.0;
    for (double phi : candidates) {
        const auto v = lambda_closed_at_rule(h, *r, phi);
        if (!v) return std::nullopt;
        best = std::max(best, *v);
    }
    return LambdaClosed{best, converges ? best : 0.0};
}

Extended delta_l_plus_of(const HamburgerHamiltonian& h, Index horizon) {
    if (auto p = rule_profile(h.lengths)) return std::max(1.0, p->pointwise);
    const auto r = growth_exponents(h.lengths, 0.5, horizon);
    if (r.delta_star_hat.is_infinite()) return Extended::infinity();
    return std::max(1.0, r.delta_star_hat.value());
}

IndexValue make_index(std::optional<double> closed, Extended estimate, double drift = 0.0) {
    IndexValue v;
    v.estimate = estimate;
    v.drift = drift;
    if (closed) {
        v.value = *closed;
        v.closed_form = true;
    } else {
        v.value = estimate;
    }
    return v;
}

Extended plus_one(const Extended& e) { return e.is_infinite() ? e : Extended(std::max(1.0, e.value())); }

}  // namespace

double G_value(const std::vector<double>& y, Index n, double alpha) {
    if (n < 2) fail(ErrorKind::precondition, "G(n; y, alpha) needs n >= 2");
    if (alpha < 0) fail(ErrorKind::domain, "alpha must be nonnegative");
    const auto logy = log_values(y, n);
    CompensatedSum s;
    for (Index k = 0; k + 1 < n; ++k) s.add(logy[static_cast<std::size_t>(k)]);
    const double nn = static_cast<double>(n);
    return -(alpha * logy[static_cast<std::size_t>(n - 1)] + s.value()) / (nn * std::log(nn));
}

double G_value(const SequenceSpec& y, Index n, double alpha) {
    if (n < 2) fail(ErrorKind::precondition, "G(n; y, alpha) needs n >= 2");
    return G_value(y.materialize(1, n), n, alpha);
}

GrowthReport growth_exponents(const std::vector<double>& y, double alpha, Index horizon, const GrowthOptions& opt) {
    if (horizon < 16) fail(ErrorKind::insufficient_data, "growth exponents need a horizon of at least 16");
    const Index count = std::min<Index>(static_cast<Index>(y.size()), 2 * horizon - 1);
    const auto logy = log_values(y, count);

    GrowthReport r;
    r.horizon = horizon;
    r.alpha = alpha;
    const auto star = pointwise_exponent(logy, horizon, opt);
    r.delta_star_hat = star.exponent;
    r.drift_star = star.drift;
    const auto avg = averaged_exponent(y, horizon, opt);
    r.delta_avg_hat = avg.exponent;
    r.drift_avg = avg.drift;

    const auto B = g_numerators(logy, horizon, alpha);
    const auto lo_ratio = nlogn_ratio(B, Extreme::min);
    const auto lo = pick(lo_ratio);
    const auto hi = pick(nlogn_ratio(B, Extreme::max));
    const double N = static_cast<double>(horizon);
    r.G_at_horizon = B.back() / (N * std::log(N));
    r.delta_liminf_raw = lo_ratio.raw;
    r.delta_limsup_hat = hi.value;
    r.drift_liminf = lo.drift;
    r.delta_liminf_hat = lo.value > opt.infinity_threshold ? Extended::infinity() : Extended(lo.value);
    if (lo.fallback)
        r.warnings.push_back("nuisance regression misfits (oscillating data); liminf normalized by ln n! only");

    r.converged = r.drift_star < 0.05 && r.drift_avg < 0.05 && r.drift_liminf < 0.05;
    if (!r.converged) r.warnings.push_back("estimates drift by more than 0.05 between the last windows");
    if (r.delta_star_hat.is_infinite() || r.delta_avg_hat.is_infinite())
        r.warnings.push_back("infinite exponent inferred from a finite horizon");
    return r;
}

GrowthReport growth_exponents(const SequenceSpec& y, double alpha, Index horizon, const GrowthOptions& opt) {
    if (horizon < 16) fail(ErrorKind::insufficient_data, "growth exponents need a horizon of at least 16");
    return growth_exponents(y.materialize(1, 2 * horizon - 1), alpha, horizon, opt);
}

RegularityReport regularity_ratio(const std::vector<double>& y) {
    const auto N = static_cast<Index>(y.size());
    if (N < 4) fail(ErrorKind::insufficient_data, "regularity check needs at least 4 terms");
    const auto logy = log_values(y, N);
    std::vector<double> lr(static_cast<std::size_t>(N));
    CompensatedSum s;
    for (Index n = 1; n <= N; ++n) {
        s.add(logy[static_cast<std::size_t>(n - 1)]);
        lr[static_cast<std::size_t>(n - 1)] = logy[static_cast<std::size_t>(n - 1)] - s.value() / static_cast<double>(n);
    }
    RegularityReport out;
    const double top = *std::max_element(lr.begin(), lr.end());
    out.sup_ratio = std::exp(top);

    std::vector<double> x, v;
    for (Index start = 1; start <= N; start *= 2) {
        const Index end = std::min<Index>(2 * start - 1, N);
        if (static_cast<double>(start) * static_cast<double>(start) < static_cast<double>(N)) continue;
        x.push_back(std::log(static_cast<double>(start)));
        v.push_back(*std::max_element(lr.begin() + (start - 1), lr.begin() + end));
    }
    if (x.size() >= 2) out.growth_slope = fit_slope(x, v, false).slope;

    const auto half = static_cast<std::ptrdiff_t>(N / 2);
    const double early = *std::max_element(lr.begin(), lr.begin() + half);
    const double late = *std::max_element(lr.begin() + half, lr.end());
    if (late <= early + 1e-3)
        out.verdict = Regularity::regular;
    else if (out.growth_slope > 0.05)
        out.verdict = Regularity::irregular;
    else
        out.verdict = Regularity::undecided;
    return out;
}

RegularityReport regularity_ratio(const SequenceSpec& y, Index horizon) { return regularity_ratio(y.materialize(1, horizon)); }

std::optional<RuleProfile> rule_profile(const SequenceSpec& y) {
    auto c = layout_of(y, value_leaf);
    if (!c) return std::nullopt;
    return profile_from(*c);
}

std::optional<RuleProfile> sin_step_profile(const SequenceSpec& angles) {
    const auto* inc = step_increment(angles);
    if (!inc) return std::nullopt;
    auto c = layout_of(*inc, sin_leaf);
    if (!c) return std::nullopt;
    return profile_from(*c);
}

std::optional<double> limit_angle(const HamburgerHamiltonian& h, Index horizon) {
    if (horizon < 8) fail(ErrorKind::insufficient_data, "limit angle needs a horizon of at least 8");
    if (const auto* inc = step_increment(h.angles); inc && has_closed_form_tail(*inc)) {
        const auto tail = closed_form_tail(*inc, horizon - 1);
        if (tail->is_infinite()) return std::nullopt;
        AngleCursor c(h.angles);
        return reduce_angle(c.advance_to(horizon) + tail->value());
    }
    const auto phi = materialize_angles(h, horizon);
    auto variation = [&](Index a, Index b) {
        double v = 0.0;
        for (Index n = a; n < b; ++n)
            v += std::fabs(std::sin(phi[static_cast<std::size_t>(n)] - phi[static_cast<std::size_t>(n - 1)]));
        return v;
    };
    const double late = variation(horizon / 2, horizon);
    const double early = variation(horizon / 4, horizon / 2);
    if (late == 0.0 || (late < 1e-3 && late < 0.75 * early)) return phi.back();
    return std::nullopt;
}

std::optional<double> lambda_closed_at(const HamburgerHamiltonian& h, double phi) {
    const auto r = lambda_rule(h, layout_of(h.lengths, value_leaf));
    if (!r) return std::nullopt;
    return lambda_closed_at_rule(h, *r, phi);
}

Extended lambda_at(const HamburgerHamiltonian& h, double phi, Index horizon, std::optional<Extended> delta_l_plus,
                   const LambdaOptions& opt) {
    if (delta_l_plus && delta_l_plus->is_infinite())
        fail(ErrorKind::inapplicable, "Lambda is defined only for finite Delta_l^+");
    if (horizon < 16) fail(ErrorKind::insufficient_data, "Lambda needs a horizon of at least 16");
    const Index M = opt.extent_factor * horizon;
    if (!opt.relaxed) validate(h, M);
    const Extended dlp = delta_l_plus ? *delta_l_plus : delta_l_plus_of(h, horizon);
    if (dlp.is_infinite()) fail(ErrorKind::inapplicable, "Lambda is defined only for finite Delta_l^+");
    const auto l = h.lengths.materialize(1, M);
    const auto angles = materialize_angles(h, M);
    std::optional<double> tail;
    if (auto t = length_tail(h, M); t && t->is_finite()) tail = t->value();
    return lambda_from_data(l, angles, phi, horizon, dlp.value(), tail, opt.infinity_threshold);
}

HamiltonianIndices hamiltonian_indices(const HamburgerHamiltonian& h, Index horizon, const IndicesOptions& opt) {
    if (horizon < 16) fail(ErrorKind::insufficient_data, "indices need a horizon of at least 16");
    const Index M = std::max<Index>(2 * horizon, opt.lambda.extent_factor * horizon);
    validate(h, M);
    HamiltonianIndices out;
    out.horizon = horizon;

    const auto l = h.lengths.materialize(1, M);
    const auto s = sin_diffs(h, 1, 2 * horizon);
    const auto gl = growth_exponents(l, 0.5, horizon, opt.growth);
    const auto gs = growth_exponents(s, 0.0, horizon, opt.growth);
    for (const auto& w : gl.warnings) out.warnings.push_back("lengths: " + w);
    for (const auto& w : gs.warnings) out.warnings.push_back("angle differences: " + w);

    const auto ll = layout_of(h.lengths, value_leaf);
    const auto* inc = step_increment(h.angles);
    const auto sl = inc ? layout_of(*inc, sin_leaf) : std::nullopt;
    const auto pl = ll ? std::optional<RuleProfile>(profile_from(*ll)) : std::nullopt;
    const auto ps = sl ? std::optional<RuleProfile>(profile_from(*sl)) : std::nullopt;
    auto field = [](const std::optional<RuleProfile>& p, double RuleProfile::*m) {
        return p ? std::optional<double>((*p).*m) : std::nullopt;
    };

    out.Delta_l = make_index(field(pl, &RuleProfile::pointwise), gl.delta_star_hat, gl.drift_star);
    out.Delta_l_plus = out.Delta_l;
    out.Delta_l_plus.value = plus_one(out.Delta_l.value);
    out.Delta_l_plus.estimate = plus_one(out.Delta_l.estimate);
    out.Delta_phi = make_index(field(ps, &RuleProfile::pointwise), gs.delta_avg_hat, gs.drift_avg);
    out.Delta_phi_star = make_index(field(ps, &RuleProfile::pointwise), gs.delta_star_hat, gs.drift_star);
    out.delta_l = make_index(field(pl, &RuleProfile::liminf), gl.delta_liminf_hat, gl.drift_liminf);
    out.delta_l_sup = make_index(field(pl, &RuleProfile::limsup), gl.delta_limsup_hat);
    out.delta_phi = make_index(field(ps, &RuleProfile::liminf), gs.delta_liminf_hat, gs.drift_liminf);
    out.delta_phi_sup = make_index(field(ps, &RuleProfile::limsup), gs.delta_limsup_hat);

    // delta_{l,phi}: liminf of the sum of both G terms.
    {
        const auto Bl = g_numerators(log_values(l, horizon), horizon, 0.5);
        const auto Bs = g_numerators(log_values(s, horizon), horizon, 0.0);
        std::vector<double> B(Bl.size());
        for (std::size_t i = 0; i < B.size(); ++i) B[i] = Bl[i] + Bs[i];
        const auto r = pick(nlogn_ratio(B, Extreme::min));
        std::optional<double> closed;
        if (ll && sl) closed = combined_extremes(phase_values(*ll), phase_values(*sl)).first;
        out.delta_l_phi = make_index(closed, r.value, r.drift);
    }
    auto is_limit = [&](const IndexValue& lo, const IndexValue& hi) {
        if (lo.closed_form && hi.closed_form) return lo.value == hi.value;
        return std::fabs(hi.estimate.value() - lo.estimate.value()) < opt.limit_tolerance;
    };
    out.delta_l_is_limit = is_limit(out.delta_l, out.delta_l_sup);
    out.delta_phi_is_limit = is_limit(out.delta_phi, out.delta_phi_sup);

    auto verdict = [](const std::optional<RuleProfile>& p, const std::vector<double>& y, Index n) {
        if (p) return p->regular ? Regularity::regular : Regularity::irregular;
        return regularity_ratio(std::vector<double>(y.begin(), y.begin() + n)).verdict;
    };
    out.lengths_regularity = verdict(pl, l, horizon);
    out.sin_regularity = verdict(ps, s, horizon);

    // Convergence exponent of the lengths: 1 / pointwise exponent of the decreasing rearrangement.
    {
        std::vector<double> sorted(l.begin(), l.begin() + 2 * horizon);
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        const auto e = pointwise_exponent(log_values(sorted, horizon / 2), horizon / 2, opt.growth);
        std::optional<double> closed;
        if (pl) closed = pl->pointwise > 0 ? 1.0 / pl->pointwise : std::numeric_limits<double>::infinity();
        IndexValue v = make_index(std::nullopt, reciprocal(e.exponent), e.drift);
        if (closed) {
            v.closed_form = true;
            v.value = std::isinf(*closed) ? Extended::infinity() : Extended(*closed);
        }
        out.convergence_exponent = v;
    }

    // Lambda over the angle grid plus the limit angle; Lambda* from the limit angle.
    out.limit_angle = limit_angle(h, M);
    const auto closed_lambda = lambda_closed_form(h, ll);
    if (out.Delta_l_plus.value.is_infinite()) {
        out.Lambda = make_index(std::nullopt, 0.0);
        out.Lambda_star = out.Lambda;
        out.warnings.push_back("Lambda is undefined for infinite Delta_l^+; reported as 0");
    } else {
        const auto phi = materialize_angles(h, M);
        std::optional<double> tail;
        if (auto t = length_tail(h, M); t && t->is_finite()) tail = t->value();
        const double dlp = out.Delta_l_plus.value.value();
        std::vector<double> grid;
        for (int k = 0; k < opt.lambda_grid; ++k) grid.push_back(pi * k / opt.lambda_grid);
        if (out.limit_angle) grid.push_back(*out.limit_angle);
        Extended best = 0.0;
        for (double a : grid) {
            const auto v = lambda_from_data(l, phi, a, horizon, dlp, tail, opt.lambda.infinity_threshold);
            if (best < v) {
                best = v;
                out.lambda_argmax = a;
            }
        }
        out.Lambda = make_index(closed_lambda ? std::optional<double>(closed_lambda->lambda) : std::nullopt, best);
        out.warnings.push_back("Lambda is a supremum over a finite angle grid and may be biased low");

        Extended star = 0.0;
        if (out.limit_angle) {
            std::vector<double> d(static_cast<std::size_t>(horizon));
            for (Index n = 0; n < horizon; ++n) d[static_cast<std::size_t>(n)] = std::fabs(std::sin(phi[static_cast<std::size_t>(n)] - *out.limit_angle));
            std::vector<double> logd(d.size());
            for (std::size_t i = 0; i < d.size(); ++i)
                logd[i] = d[i] > 0 ? std::log(d[i]) : -std::numeric_limits<double>::infinity();
            star = pointwise_exponent(logd, horizon, opt.growth).exponent;
        }
        out.Lambda_star =
            make_index(closed_lambda ? std::optional<double>(closed_lambda->lambda_star) : std::nullopt, star);
    }
    return out;
}

const char* regularity_name(Regularity r) noexcept {
    switch (r) {
        case Regularity::regular: return "regular";
        case Regularity::irregular: return "irregular";
        case Regularity::undecided: return "undecided";
    }
    return "undecided";
}

nlohmann::json extended_json(const Extended& e) {
    if (e.is_infinite()) return "inf";
    return e.value();
}

Extended extended_from_json(const nlohmann::json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") return Extended::infinity();
    if (j.is_number()) return j.get<double>();
    fail(ErrorKind::parse, "expected a number or \"inf\"");
}

nlohmann::json to_json(const GrowthReport& r) {
    return {{"horizon", r.horizon},
            {"alpha", r.alpha},
            {"deltaStarHat", extended_json(r.delta_star_hat)},
            {"deltaAvgHat", extended_json(r.delta_avg_hat)},
            {"deltaLiminfHat", extended_json(r.delta_liminf_hat)},
            {"deltaLiminfRaw", r.delta_liminf_raw},
            {"deltaLimsupHat", r.delta_limsup_hat},
            {"GAtHorizon", r.G_at_horizon},
            {"drift", {{"star", r.drift_star}, {"avg", r.drift_avg}, {"liminf", r.drift_liminf}}},
            {"converged", r.converged},
            {"warnings", r.warnings}};
}

nlohmann::json to_json(const RegularityReport& r) {
    return {{"supRatio", r.sup_ratio}, {"growthSlope", r.growth_slope}, {"verdict", regularity_name(r.verdict)}};
}

nlohmann::json to_json(const IndexValue& v) {
    return {{"value", extended_json(v.value)},
            {"estimate", extended_json(v.estimate)},
            {"source", v.closed_form ? "closed-form" : "estimate"},
            {"drift", v.drift}};
}

nlohmann::json to_json(const HamiltonianIndices& idx) {
    nlohmann::json j{{"horizon", idx.horizon},
                     {"DeltaL", to_json(idx.Delta_l)},
                     {"DeltaLPlus", to_json(idx.Delta_l_plus)},
                     {"DeltaPhi", to_json(idx.Delta_phi)},
                     {"DeltaPhiStar", to_json(idx.Delta_phi_star)},
                     {"Lambda", to_json(idx.Lambda)},
                     {"LambdaStar", to_json(idx.Lambda_star)},
                     {"deltaL", to_json(idx.delta_l)},
                     {"deltaPhi", to_json(idx.delta_phi)},
                     {"deltaLPhi", to_json(idx.delta_l_phi)},
                     {"deltaLSup", to_json(idx.delta_l_sup)},
                     {"deltaPhiSup", to_json(idx.delta_phi_sup)},
                     {"deltaLIsLimit", idx.delta_l_is_limit},
                     {"deltaPhiIsLimit", idx.delta_phi_is_limit},
                     {"convergenceExponent", to_json(idx.convergence_exponent)},
                     {"lambdaArgmax", idx.lambda_argmax},
                     {"lengthsRegularity", regularity_name(idx.lengths_regularity)},
                     {"sinDiffRegularity", regularity_name(idx.sin_regularity)},
                     {"warnings", idx.warnings}};
    if (idx.limit_angle)
        j["limitAngle"] = *idx.limit_angle;
    else
        j["limitAngle"] = "not convergent";
    return j;
}

}  // namespace canon
