#include "canon/sequence.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "canon/error.hpp"

namespace canon {

namespace {

constexpr double pi = std::numbers::pi;

double power_value(const PowerRule& p, Index n) {
    if (n == 1) {
        if (p.at_one) return *p.at_one;
        return p.kappa == 0.0 ? p.scale : 1.0;
    }
    const double x = static_cast<double>(n);
    double v = p.scale * std::pow(x, -p.tau);
    if (p.kappa != 0.0) v *= std::pow(std::log(x), -p.kappa);
    return v;
}

void check_index(Index n) {
    if (n < 1) fail(ErrorKind::invalid_spec, "sequence index " + std::to_string(n) + " is below 1");
}

double checked(double v, Index n) {
    if (!std::isfinite(v))
        fail(ErrorKind::invalid_spec, "rule is undefined or not finite at n = " + std::to_string(n));
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// construction

SequenceSpec SequenceSpec::power(double tau, double kappa, double scale, std::optional<double> at_one) {
    if (!std::isfinite(tau) || !std::isfinite(kappa) || !std::isfinite(scale))
        fail(ErrorKind::invalid_spec, "power rule parameters must be finite");
    if (at_one && !std::isfinite(*at_one)) fail(ErrorKind::invalid_spec, "power rule value at n = 1 must be finite");
    return SequenceSpec(std::make_shared<SequenceRule>(SequenceRule{PowerRule{tau, kappa, scale, at_one}}));
}

SequenceSpec SequenceSpec::constant(double value) {
    if (!std::isfinite(value)) fail(ErrorKind::invalid_spec, "constant rule value must be finite");
    return SequenceSpec(std::make_shared<SequenceRule>(SequenceRule{ConstantRule{value}}));
}

SequenceSpec SequenceSpec::explicit_values(std::vector<double> prefix, std::optional<SequenceSpec> tail) {
    for (double v : prefix)
        if (!std::isfinite(v)) fail(ErrorKind::invalid_spec, "explicit prefix contains a non-finite value");
    if (tail && tail->empty()) tail.reset();
    return SequenceSpec(std::make_shared<SequenceRule>(SequenceRule{ExplicitRule{std::move(prefix), std::move(tail)}}));
}

SequenceSpec SequenceSpec::arithmetic_step(double base, SequenceSpec increment) {
    if (!std::isfinite(base)) fail(ErrorKind::invalid_spec, "arithmetic-step base must be finite");
    if (increment.empty()) fail(ErrorKind::invalid_spec, "arithmetic-step needs an increment rule");
    return SequenceSpec(std::make_shared<SequenceRule>(SequenceRule{StepRule{base, std::move(increment)}}));
}

SequenceSpec make_block(int modulus, BlockIndexing indexing, std::map<int, SequenceSpec> classes,
                        std::optional<SequenceSpec> fallback) {
    if (modulus < 1) fail(ErrorKind::invalid_spec, "block modulus must be at least 1");
    for (const auto& [k, s] : classes) {
        if (k < 0 || k >= modulus)
            fail(ErrorKind::invalid_spec, "block class " + std::to_string(k) + " outside 0.." + std::to_string(modulus - 1));
        if (s.empty()) fail(ErrorKind::invalid_spec, "block class " + std::to_string(k) + " has no rule");
    }
    if (!fallback && static_cast<int>(classes.size()) != modulus)
        fail(ErrorKind::invalid_spec, "block rule must cover every class or give a default");
    return SequenceSpec(std::make_shared<SequenceRule>(
        SequenceRule{BlockRule{modulus, indexing, std::move(classes), std::move(fallback)}}));
}

int BlockRule::class_of(Index n) const {
    if (indexing == BlockIndexing::residue) return static_cast<int>(n % modulus);
    const int level = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(n))) - 1;
    return level % modulus;
}

const SequenceSpec& BlockRule::spec_for(int cls) const {
    auto it = classes.find(cls);
    if (it != classes.end()) return it->second;
    if (fallback) return *fallback;
    fail(ErrorKind::invalid_spec, "block rule has no entry for class " + std::to_string(cls));
}

const SequenceRule& SequenceSpec::rule() const {
    if (!rule_) fail(ErrorKind::invalid_spec, "empty sequence spec");
    return *rule_;
}

// ---------------------------------------------------------------------------
// cursors

struct SequenceCursor::Impl {
    virtual ~Impl() = default;
    virtual double advance_to(Index n) = 0;
};

namespace {

std::unique_ptr<SequenceCursor::Impl> make_impl(const SequenceSpec& spec);

struct PowerImpl final : SequenceCursor::Impl {
    PowerRule p;
    explicit PowerImpl(PowerRule r) : p(r) {}
    double advance_to(Index n) override { return power_value(p, n); }
};

struct ConstantImpl final : SequenceCursor::Impl {
    double v;
    explicit ConstantImpl(double x) : v(x) {}
    double advance_to(Index) override { return v; }
};

struct BlockImpl final : SequenceCursor::Impl {
    const BlockRule* rule;
    std::map<int, std::unique_ptr<SequenceCursor::Impl>> subs;
    explicit BlockImpl(const BlockRule* r) : rule(r) {}
    double advance_to(Index n) override {
        const int cls = rule->class_of(n);
        auto& sub = subs[cls];
        if (!sub) sub = make_impl(rule->spec_for(cls));
        return sub->advance_to(n);
    }
};

struct StepImpl final : SequenceCursor::Impl {
    std::unique_ptr<SequenceCursor::Impl> inc;
    CompensatedSum sum;
    Index at = 1;
    explicit StepImpl(const StepRule& r) : inc(make_impl(r.increment)) { sum.add(r.base); }
    double advance_to(Index n) override {
        while (at < n) {
            sum.add(inc->advance_to(at));
            ++at;
        }
        return sum.value();
    }
};

struct ExplicitImpl final : SequenceCursor::Impl {
    const ExplicitRule* rule;
    std::unique_ptr<SequenceCursor::Impl> tail;
    explicit ExplicitImpl(const ExplicitRule* r) : rule(r) {}
    double advance_to(Index n) override {
        if (n <= static_cast<Index>(rule->prefix.size())) return rule->prefix[static_cast<std::size_t>(n - 1)];
        if (!rule->tail)
            fail(ErrorKind::invalid_spec, "explicit sequence has no tail rule beyond index " +
                                              std::to_string(rule->prefix.size()));
        if (!tail) tail = make_impl(*rule->tail);
        return tail->advance_to(n);
    }
};

std::unique_ptr<SequenceCursor::Impl> make_impl(const SequenceSpec& spec) {
    const auto& r = spec.rule().rule;
    if (auto p = std::get_if<PowerRule>(&r)) return std::make_unique<PowerImpl>(*p);
    if (auto c = std::get_if<ConstantRule>(&r)) return std::make_unique<ConstantImpl>(c->value);
    if (auto b = std::get_if<BlockRule>(&r)) return std::make_unique<BlockImpl>(b);
    if (auto s = std::get_if<StepRule>(&r)) return std::make_unique<StepImpl>(*s);
    return std::make_unique<ExplicitImpl>(&std::get<ExplicitRule>(r));
}

}  // namespace

SequenceCursor::SequenceCursor(const SequenceSpec& spec) : impl_(make_impl(spec)) {}
SequenceCursor::~SequenceCursor() = default;
SequenceCursor::SequenceCursor(SequenceCursor&&) noexcept = default;
SequenceCursor& SequenceCursor::operator=(SequenceCursor&&) noexcept = default;

double SequenceCursor::advance_to(Index n) {
    check_index(n);
    return checked(impl_->advance_to(n), n);
}

double reduce_angle(double phi) {
    double r = std::fmod(phi, pi);
    if (r < 0) r += pi;
    if (r >= pi) r -= pi;
    return r;
}

struct AngleCursor::Impl {
    std::optional<SequenceCursor> plain;
    std::optional<SequenceCursor> increments;
    double reduced = 0.0;
    Index at = 1;
};

AngleCursor::AngleCursor(const SequenceSpec& spec) : impl_(std::make_unique<Impl>()) {
    if (auto s = std::get_if<StepRule>(&spec.rule().rule)) {
        impl_->increments.emplace(s->increment);
        impl_->reduced = reduce_angle(s->base);
    } else {
        impl_->plain.emplace(spec);
    }
}
AngleCursor::~AngleCursor() = default;
AngleCursor::AngleCursor(AngleCursor&&) noexcept = default;
AngleCursor& AngleCursor::operator=(AngleCursor&&) noexcept = default;

double AngleCursor::advance_to(Index n) {
    check_index(n);
    if (impl_->plain) return reduce_angle(impl_->plain->advance_to(n));
    while (impl_->at < n) {
        const double step = reduce_angle(impl_->increments->advance_to(impl_->at));
        impl_->reduced = reduce_angle(impl_->reduced + step);
        ++impl_->at;
    }
    return impl_->reduced;
}

// ---------------------------------------------------------------------------
// evaluation

double SequenceSpec::at(Index n) const {
    SequenceCursor c(*this);
    return c.advance_to(n);
}

std::vector<double> SequenceSpec::materialize(Index from, Index to, Index cap) const {
    if (from < 1 || to < from)
        fail(ErrorKind::invalid_spec, "materialize needs 1 <= from <= to, got " + std::to_string(from) + ".." +
                                          std::to_string(to));
    if (to - from + 1 > cap)
        fail(ErrorKind::cap_exceeded, "materialize range of " + std::to_string(to - from + 1) +
                                          " values exceeds the cap " + std::to_string(cap));
    SequenceCursor c(*this);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(to - from + 1));
    for (Index n = from; n <= to; ++n) out.push_back(c.advance_to(n));
    return out;
}

std::vector<double> SequenceSpec::differences(Index from, Index to, Index cap) const {
    if (auto s = std::get_if<StepRule>(&rule().rule)) return s->increment.materialize(from, to, cap);
    auto v = materialize(from, to + 1, cap);
    std::vector<double> d(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) d[i] = v[i + 1] - v[i];
    return d;
}

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

// ---------------------------------------------------------------------------
// closed-form tails

namespace {

constexpr Index direct_limit = 4096;

bool power_summable(const PowerRule& p) {
    if (p.scale == 0.0) return true;
    return p.tau > 1.0 || (p.tau == 1.0 && p.kappa > 1.0);
}

// Integral of x^-tau (ln x)^-kappa over [a, inf), a >= 2, for a summable rule.
double power_integral(double tau, double kappa, double a) {
    const double L = std::log(a);
    if (kappa == 0.0) return std::pow(a, 1.0 - tau) / (tau - 1.0);
    if (tau == 1.0) return std::pow(L, 1.0 - kappa) / (kappa - 1.0);
    const double s0 = (tau - 1.0) * L;
    boost::math::quadrature::exp_sinh<double> integrator;
    const double j = integrator.integrate(
        [&](double t) { return std::exp(-t) * std::pow(1.0 + t / s0, -kappa); }, 0.0,
        std::numeric_limits<double>::infinity());
    return std::pow(a, 1.0 - tau) * std::pow(L, -kappa) / (tau - 1.0) * j;
}

// Euler-Maclaurin sum of f(a), f(a+q), f(a+2q), ... for f(x) = c x^-tau (ln x)^-kappa.
double power_ap_tail(const PowerRule& p, double a, double q) {
    if (p.scale == 0.0) return 0.0;
    const double L = std::log(a);
    const double f = p.scale * std::pow(a, -p.tau) * std::pow(L, -p.kappa);
    // derivatives of ln f
    const double g1 = -p.tau / a - p.kappa / (a * L);
    const double g2 = p.tau / (a * a) + p.kappa * (L + 1.0) / (a * a * L * L);
    const double g3 = -2.0 * p.tau / (a * a * a) - p.kappa * (2.0 * L * L + 3.0 * L + 2.0) / (a * a * a * L * L * L);
    const double f1 = f * g1;
    const double f3 = f * (g3 + 3.0 * g1 * g2 + g1 * g1 * g1);
    return p.scale * power_integral(p.tau, p.kappa, a) / q + 0.5 * f - q * f1 / 12.0 + q * q * q * f3 / 720.0;
}

// Sum over the contiguous range [a, b] of a power rule; b may be astronomically large.
double power_range_sum(const PowerRule& p, double a, double b) {
    if (b < a) return 0.0;
    if (b - a < direct_limit || a < direct_limit) {
        CompensatedSum s;
        double n = a;
        const double stop = std::min(b, std::max(a + direct_limit, static_cast<double>(direct_limit)));
        for (; n <= stop; n += 1.0) s.add(power_value(p, static_cast<Index>(n)));
        if (n <= b) s.add(power_ap_tail(p, n, 1.0) - power_ap_tail(p, b + 1.0, 1.0));
        return s.value();
    }
    return power_ap_tail(p, a, 1.0) - power_ap_tail(p, b + 1.0, 1.0);
}

enum class TailKind { none, zero, divergent, power };

TailKind classify_class(const SequenceSpec& spec, const PowerRule** out) {
    const auto& r = spec.rule().rule;
    if (auto c = std::get_if<ConstantRule>(&r)) return c->value == 0.0 ? TailKind::zero : TailKind::divergent;
    if (auto p = std::get_if<PowerRule>(&r)) {
        *out = p;
        return power_summable(*p) ? TailKind::power : TailKind::divergent;
    }
    return TailKind::none;
}

std::optional<Extended> block_tail(const BlockRule& b, const SequenceSpec& whole, Index after) {
    std::vector<const PowerRule*> rules(static_cast<std::size_t>(b.modulus), nullptr);
    bool divergent = false;
    for (int k = 0; k < b.modulus; ++k) {
        const PowerRule* p = nullptr;
        switch (classify_class(b.spec_for(k), &p)) {
            case TailKind::none: return std::nullopt;
            case TailKind::divergent: divergent = true; break;
            case TailKind::zero: break;
            case TailKind::power: rules[static_cast<std::size_t>(k)] = p; break;
        }
    }
    if (divergent) return Extended::infinity();

    const Index start = after + 1;
    const Index A = std::max<Index>(start, direct_limit * b.modulus);
    CompensatedSum s;
    SequenceCursor c(whole);
    for (Index n = start; n < A; ++n) s.add(c.advance_to(n));

    if (b.indexing == BlockIndexing::residue) {
        for (int k = 0; k < b.modulus; ++k) {
            const PowerRule* p = rules[static_cast<std::size_t>(k)];
            if (!p) continue;
            Index first = A + ((k - A % b.modulus) % b.modulus + b.modulus) % b.modulus;
            s.add(power_ap_tail(*p, static_cast<double>(first), static_cast<double>(b.modulus)));
        }
        return Extended(s.value());
    }

    int level = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(A))) - 1;
    double lo = static_cast<double>(A);
    for (; level < 1000; ++level) {
        const double hi = std::ldexp(1.0, level + 1) - 1.0;
        const PowerRule* p = rules[static_cast<std::size_t>(level % b.modulus)];
        if (p) {
            const double part = power_range_sum(*p, lo, hi);
            s.add(part);
            if (part < 1e-20 * std::fabs(s.value()) && level > 64) {
                // Once every class has decayed past the accumulated sum the rest is negligible.
                bool all_small = true;
                for (int k = 1; k < b.modulus; ++k) {
                    const PowerRule* o = rules[static_cast<std::size_t>((level + k) % b.modulus)];
                    if (o && power_value(*o, static_cast<Index>(std::min(hi + 1.0, 9e18))) * (hi + 1.0) >
                                 1e-20 * std::fabs(s.value()))
                        all_small = false;
                }
                if (all_small) break;
            }
        }
        lo = hi + 1.0;
    }
    return Extended(s.value());
}

}  // namespace

std::optional<Extended> closed_form_tail(const SequenceSpec& spec, Index after) {
    if (after < 0) fail(ErrorKind::invalid_spec, "tail index must be non-negative");
    const auto& r = spec.rule().rule;
    if (auto c = std::get_if<ConstantRule>(&r)) {
        if (c->value == 0.0) return Extended(0.0);
        return Extended::infinity();
    }
    if (auto p = std::get_if<PowerRule>(&r)) {
        if (!power_summable(*p)) return Extended::infinity();
        const Index start = after + 1;
        const Index A = std::max<Index>(start, direct_limit);
        CompensatedSum s;
        for (Index n = start; n < A; ++n) s.add(power_value(*p, n));
        s.add(power_ap_tail(*p, static_cast<double>(A), 1.0));
        return Extended(s.value());
    }
    if (auto b = std::get_if<BlockRule>(&r)) return block_tail(*b, spec, after);
    if (auto e = std::get_if<ExplicitRule>(&r)) {
        if (!e->tail) return std::nullopt;
        const Index len = static_cast<Index>(e->prefix.size());
        auto rest = closed_form_tail(*e->tail, std::max(after, len));
        if (!rest || rest->is_infinite()) return rest;
        CompensatedSum s;
        for (Index n = after + 1; n <= len; ++n) s.add(e->prefix[static_cast<std::size_t>(n - 1)]);
        s.add(rest->value());
        return Extended(s.value());
    }
    return std::nullopt;
}

bool has_closed_form_tail(const SequenceSpec& spec) {
    const auto& r = spec.rule().rule;
    if (std::holds_alternative<ConstantRule>(r) || std::holds_alternative<PowerRule>(r)) return true;
    if (auto b = std::get_if<BlockRule>(&r)) {
        for (int k = 0; k < b->modulus; ++k) {
            const auto& cr = b->spec_for(k).rule().rule;
            if (!std::holds_alternative<ConstantRule>(cr) && !std::holds_alternative<PowerRule>(cr)) return false;
        }
        return true;
    }
    if (auto e = std::get_if<ExplicitRule>(&r)) return e->tail && has_closed_form_tail(*e->tail);
    return false;
}

// ---------------------------------------------------------------------------
// json

nlohmann::json to_json(const SequenceSpec& spec) {
    using nlohmann::json;
    const auto& r = spec.rule().rule;
    if (auto p = std::get_if<PowerRule>(&r)) {
        json j{{"rule", "power"}, {"tau", p->tau}, {"kappa", p->kappa}, {"scale", p->scale}};
        if (p->at_one) j["at_one"] = *p->at_one;
        return j;
    }
    if (auto c = std::get_if<ConstantRule>(&r)) return json{{"rule", "constant"}, {"value", c->value}};
    if (auto b = std::get_if<BlockRule>(&r)) {
        json classes = json::object();
        for (const auto& [k, s] : b->classes) classes[std::to_string(k)] = to_json(s);
        json j{{"rule", "block"},
               {"modulus", b->modulus},
               {"indexing", b->indexing == BlockIndexing::residue ? "residue" : "dyadic"},
               {"classes", classes}};
        if (b->fallback) j["default"] = to_json(*b->fallback);
        return j;
    }
    if (auto s = std::get_if<StepRule>(&r))
        return json{{"rule", "arithmetic-step"}, {"base", s->base}, {"increment", to_json(s->increment)}};
    const auto& e = std::get<ExplicitRule>(r);
    json j{{"rule", "explicit"}, {"prefix", e.prefix}};
    if (e.tail) j["tail"] = to_json(*e.tail);
    return j;
}

namespace {

double number_field(const nlohmann::json& j, const char* key, std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        fail(ErrorKind::validation, std::string("sequence spec is missing \"") + key + "\"");
    }
    if (!j.at(key).is_number()) fail(ErrorKind::validation, std::string("field \"") + key + "\" must be a number");
    return j.at(key).get<double>();
}

}  // namespace

SequenceSpec sequence_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("rule") || !j.at("rule").is_string())
        fail(ErrorKind::validation, "sequence spec must be an object with a string \"rule\"");
    const auto rule = j.at("rule").get<std::string>();
    try {
        if (rule == "power") {
            std::optional<double> one;
            if (j.contains("at_one")) one = number_field(j, "at_one");
            return SequenceSpec::power(number_field(j, "tau"), number_field(j, "kappa", 0.0),
                                       number_field(j, "scale", 1.0), one);
        }
        if (rule == "constant") return SequenceSpec::constant(number_field(j, "value"));
        if (rule == "arithmetic-step") {
            if (!j.contains("increment")) fail(ErrorKind::validation, "arithmetic-step needs \"increment\"");
            return SequenceSpec::arithmetic_step(number_field(j, "base", 0.0), sequence_from_json(j.at("increment")));
        }
        if (rule == "explicit") {
            if (!j.contains("prefix") || !j.at("prefix").is_array())
                fail(ErrorKind::validation, "explicit rule needs a \"prefix\" array");
            std::vector<double> prefix;
            for (const auto& v : j.at("prefix")) {
                if (!v.is_number()) fail(ErrorKind::validation, "explicit prefix entries must be numbers");
                prefix.push_back(v.get<double>());
            }
            std::optional<SequenceSpec> tail;
            if (j.contains("tail") && !j.at("tail").is_null()) tail = sequence_from_json(j.at("tail"));
            return SequenceSpec::explicit_values(std::move(prefix), std::move(tail));
        }
        if (rule == "block") {
            const double m = number_field(j, "modulus");
            if (m != std::floor(m) || m < 1) fail(ErrorKind::validation, "block modulus must be a positive integer");
            BlockIndexing idx = BlockIndexing::residue;
            if (j.contains("indexing")) {
                const auto s = j.at("indexing").get<std::string>();
                if (s == "dyadic")
                    idx = BlockIndexing::dyadic;
                else if (s != "residue")
                    fail(ErrorKind::validation, "block indexing must be \"residue\" or \"dyadic\"");
            }
            std::map<int, SequenceSpec> classes;
            if (j.contains("classes")) {
                if (!j.at("classes").is_object()) fail(ErrorKind::validation, "block \"classes\" must be an object");
                for (const auto& [k, v] : j.at("classes").items()) {
                    std::size_t used = 0;
                    int key = 0;
                    try {
                        key = std::stoi(k, &used);
                    } catch (const std::exception&) {
                        used = 0;
                    }
                    if (used != k.size()) fail(ErrorKind::validation, "block class key \"" + k + "\" is not an integer");
                    classes.emplace(key, sequence_from_json(v));
                }
            }
            std::optional<SequenceSpec> fallback;
            if (j.contains("default")) fallback = sequence_from_json(j.at("default"));
            return make_block(static_cast<int>(m), idx, std::move(classes), std::move(fallback));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::validation, std::string("malformed sequence spec: ") + e.what());
    }
    fail(ErrorKind::validation, "unknown sequence rule \"" + rule + "\"");
}

}  // namespace canon
