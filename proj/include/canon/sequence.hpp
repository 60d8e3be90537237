#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "canon/extended.hpp"

namespace canon {

using Index = std::int64_t;

// Largest number of values materialize() hands out in one call unless told otherwise.
inline constexpr Index default_materialize_cap = 50'000'000;

struct SequenceRule;

// Immutable rule-based sequence y_1, y_2, ... (1-based). Copies share the rule tree.
class SequenceSpec {
public:
    SequenceSpec() = default;
    explicit SequenceSpec(std::shared_ptr<const SequenceRule> rule) : rule_(std::move(rule)) {}

    // c * n^-tau * (ln n)^-kappa for n >= 2. At n = 1 the override is used when given;
    // without one the formula value c is used for kappa == 0 and 1 otherwise.
    static SequenceSpec power(double tau, double kappa = 0.0, double scale = 1.0,
                              std::optional<double> at_one = std::nullopt);
    static SequenceSpec constant(double value);
    static SequenceSpec explicit_values(std::vector<double> prefix,
                                        std::optional<SequenceSpec> tail = std::nullopt);
    // y_1 = base, y_{n+1} = y_n + increment_n.
    static SequenceSpec arithmetic_step(double base, SequenceSpec increment);

    bool empty() const noexcept { return !rule_; }
    const SequenceRule& rule() const;

    double at(Index n) const;
    std::vector<double> materialize(Index from, Index to, Index cap = default_materialize_cap) const;

    // y_{n+1} - y_n for n in [from, to]. Exact increments for arithmetic-step rules.
    std::vector<double> differences(Index from, Index to, Index cap = default_materialize_cap) const;

private:
    std::shared_ptr<const SequenceRule> rule_;
};

enum class BlockIndexing {
    residue,  // class of n is n mod q
    dyadic,   // class of n is floor(log2 n) mod q
};

struct PowerRule {
    double tau = 0.0;
    double kappa = 0.0;
    double scale = 1.0;
    std::optional<double> at_one;
};

struct ConstantRule {
    double value = 0.0;
};

struct BlockRule {
    int modulus = 1;
    BlockIndexing indexing = BlockIndexing::residue;
    std::map<int, SequenceSpec> classes;
    std::optional<SequenceSpec> fallback;

    int class_of(Index n) const;
    const SequenceSpec& spec_for(int cls) const;
};

struct StepRule {
    double base = 0.0;
    SequenceSpec increment;
};

struct ExplicitRule {
    std::vector<double> prefix;
    std::optional<SequenceSpec> tail;
};

struct SequenceRule {
    std::variant<PowerRule, ConstantRule, BlockRule, StepRule, ExplicitRule> rule;
};

SequenceSpec make_block(int modulus, BlockIndexing indexing, std::map<int, SequenceSpec> classes,
                        std::optional<SequenceSpec> fallback = std::nullopt);

// Sequential reader; advance_to is amortized O(steps) for arithmetic-step rules and O(1) otherwise.
class SequenceCursor {
public:
    explicit SequenceCursor(const SequenceSpec& spec);
    ~SequenceCursor();
    SequenceCursor(SequenceCursor&&) noexcept;
    SequenceCursor& operator=(SequenceCursor&&) noexcept;

    // Value at n; n must not decrease between calls.
    double advance_to(Index n);

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

// Reads angles reduced into [0, pi). Step rules are accumulated modulo pi, which keeps
// multiples of pi/2 exact and avoids the loss of digits of a raw partial sum.
class AngleCursor {
public:
    explicit AngleCursor(const SequenceSpec& spec);
    ~AngleCursor();
    AngleCursor(AngleCursor&&) noexcept;
    AngleCursor& operator=(AngleCursor&&) noexcept;
    double advance_to(Index n);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

double reduce_angle(double phi);

// Sum of y_n over n > N for rules whose tail has a closed-form treatment
// (power laws, residue/dyadic blocks of them, explicit prefix with such a tail).
// Returns nullopt when the rule is not of that kind and infinity when the series diverges.
std::optional<Extended> closed_form_tail(const SequenceSpec& spec, Index after);

// True when closed_form_tail applies to the spec.
bool has_closed_form_tail(const SequenceSpec& spec);

// Compensated (Neumaier) running sum.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

nlohmann::json to_json(const SequenceSpec& spec);
SequenceSpec sequence_from_json(const nlohmann::json& j);

}  // namespace canon
