#include "canon/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "canon/error.hpp"

namespace canon {

namespace {

bool angles_degenerate(double phi_a, double phi_b) {
    const double s = std::fabs(std::sin(phi_b - phi_a));
    return s <= 1e-14 * std::max({1.0, std::fabs(phi_a), std::fabs(phi_b)});
}

bool step_degenerate(double increment) {
    const double s = std::fabs(std::sin(increment));
    return s == 0.0 || (std::fabs(increment) > 1.0 && s < 1e-14 * std::fabs(increment));
}

}  // namespace

void FiniteRankHamiltonian::validate() const {
    if (lengths.size() != angles.size())
        fail(ErrorKind::invalid_hamiltonian, "lengths and angles differ in size");
    if (lengths.empty()) fail(ErrorKind::invalid_hamiltonian, "finite-rank Hamiltonian needs at least one interval");
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        if (!(lengths[i] > 0.0) || !std::isfinite(lengths[i]))
            fail(ErrorKind::invalid_hamiltonian, "length l_" + std::to_string(i + 1) + " is not positive");
        if (!std::isfinite(angles[i]))
            fail(ErrorKind::invalid_hamiltonian, "angle phi_" + std::to_string(i + 1) + " is not finite");
        if (i > 0 && angles_degenerate(angles[i - 1], angles[i]))
            fail(ErrorKind::invalid_hamiltonian,
                 "phi_" + std::to_string(i + 1) + " equals phi_" + std::to_string(i) + " mod pi");
    }
}

IntervalCursor::IntervalCursor(const HamburgerHamiltonian& h) : lengths_(h.lengths), angles_(h.angles) {}

Interval IntervalCursor::next() {
    ++at_;
    const double l = lengths_.advance_to(at_);
    if (!(l > 0.0)) fail(ErrorKind::invalid_hamiltonian, "length l_" + std::to_string(at_) + " is not positive");
    const double phi = angles_.advance_to(at_);
    return {l, std::cos(phi), std::sin(phi)};
}

double nodes(const HamburgerHamiltonian& h, Index n) {
    if (n < 0) fail(ErrorKind::invalid_spec, "node index must be non-negative");
    CompensatedSum s;
    SequenceCursor c(h.lengths);
    for (Index k = 1; k <= n; ++k) s.add(c.advance_to(k));
    return s.value();
}

std::vector<double> node_table(const HamburgerHamiltonian& h, Index n) {
    if (n < 0) fail(ErrorKind::invalid_spec, "node index must be non-negative");
    if (n + 1 > default_materialize_cap) fail(ErrorKind::cap_exceeded, "node table too large");
    std::vector<double> x(static_cast<std::size_t>(n + 1), 0.0);
    CompensatedSum s;
    SequenceCursor c(h.lengths);
    for (Index k = 1; k <= n; ++k) {
        s.add(c.advance_to(k));
        x[static_cast<std::size_t>(k)] = s.value();
    }
    return x;
}

std::optional<Extended> length_tail(const HamburgerHamiltonian& h, Index after) {
    return closed_form_tail(h.lengths, after);
}

LimitClassification classify_limit(const HamburgerHamiltonian& h, Index horizon, double tolerance) {
    if (horizon < 2) fail(ErrorKind::precondition, "classify_limit needs horizon >= 2");
    LimitClassification out;
    if (auto tail = length_tail(h, 0)) {
        out.closed_form = true;
        if (tail->is_infinite()) {
            out.kind = LimitKind::limit_point;
            out.reason = "length series diverges (closed-form rule)";
        } else {
            out.kind = LimitKind::limit_circle;
            out.total_length = tail->value();
            out.error_bound = 1e-12 * tail->value() + 1e-300;
            out.reason = "length series converges (closed-form rule)";
        }
        return out;
    }

    // Numerical heuristic on dyadic block sums of the lengths.
    const auto l = h.lengths.materialize(1, horizon);
    std::vector<double> blocks;
    CompensatedSum total;
    CompensatedSum block;
    Index next_edge = 2;
    for (Index n = 1; n <= horizon; ++n) {
        const double v = l[static_cast<std::size_t>(n - 1)];
        if (!(v > 0.0)) fail(ErrorKind::invalid_hamiltonian, "length l_" + std::to_string(n) + " is not positive");
        total.add(v);
        block.add(v);
        if (n + 1 == next_edge) {
            blocks.push_back(block.value());
            block = CompensatedSum{};
            next_edge *= 2;
        }
    }
    if (blocks.size() < 5) {
        out.reason = "horizon too short for the tail heuristic";
        return out;
    }
    const std::size_t m = blocks.size();
    bool decreasing = true;
    bool flat = true;
    double worst_ratio = 0.0;
    for (std::size_t k = m - 3; k < m; ++k) {
        const double r = blocks[k] / blocks[k - 1];
        worst_ratio = std::max(worst_ratio, r);
        if (!(r < 1.0)) decreasing = false;
        if (r < 1.0 - 1e-3) flat = false;
    }
    if (decreasing && worst_ratio < 0.95) {
        const double tail = blocks[m - 1] * worst_ratio / (1.0 - worst_ratio);
        if (tail < tolerance) {
            out.kind = LimitKind::limit_circle;
            out.total_length = total.value() + tail;
            out.error_bound = tail;
            out.reason = "dyadic block sums decay geometrically; tail estimate below tolerance";
            return out;
        }
        out.reason = "tail estimate above tolerance";
        return out;
    }
    if (flat) {
        out.kind = LimitKind::limit_point;
        out.reason = "dyadic block sums do not decay";
        return out;
    }
    out.reason = "neither criterion fired";
    return out;
}

std::vector<double> sin_diffs(const HamburgerHamiltonian& h, Index from, Index to) {
    const bool stepped = std::holds_alternative<StepRule>(h.angles.rule().rule);
    std::vector<double> out;
    if (stepped) {
        out = h.angles.differences(from, to);
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (step_degenerate(out[i]))
                fail(ErrorKind::invalid_hamiltonian, "phi_" + std::to_string(from + static_cast<Index>(i) + 1) +
                                                         " equals phi_" + std::to_string(from + static_cast<Index>(i)) +
                                                         " mod pi");
            out[i] = std::fabs(std::sin(out[i]));
        }
        return out;
    }
    const auto phi = h.angles.materialize(from, to + 1);
    out.resize(phi.size() - 1);
    for (std::size_t i = 0; i + 1 < phi.size(); ++i) {
        if (angles_degenerate(phi[i], phi[i + 1]))
            fail(ErrorKind::invalid_hamiltonian, "phi_" + std::to_string(from + static_cast<Index>(i) + 1) +
                                                     " equals phi_" + std::to_string(from + static_cast<Index>(i)) +
                                                     " mod pi");
        out[i] = std::fabs(std::sin(phi[i + 1] - phi[i]));
    }
    return out;
}

void validate(const HamburgerHamiltonian& h, Index horizon) {
    if (h.lengths.empty() || h.angles.empty()) fail(ErrorKind::invalid_hamiltonian, "Hamiltonian needs lengths and angles");
    SequenceCursor c(h.lengths);
    for (Index n = 1; n <= horizon; ++n)
        if (!(c.advance_to(n) > 0.0))
            fail(ErrorKind::invalid_hamiltonian, "length l_" + std::to_string(n) + " is not positive");
    if (horizon >= 2) sin_diffs(h, 1, horizon - 1);
}

FiniteRankHamiltonian truncate(const HamburgerHamiltonian& h, Index n) {
    FiniteRankHamiltonian f;
    f.lengths = h.lengths.materialize(1, n);
    f.angles = h.angles.materialize(1, n);
    return f;
}

nlohmann::json to_json(const HamburgerHamiltonian& h) {
    return nlohmann::json{{"lengths", to_json(h.lengths)}, {"angles", to_json(h.angles)}};
}

HamburgerHamiltonian hamiltonian_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("lengths") || !j.contains("angles"))
        fail(ErrorKind::validation, "Hamiltonian must be an object with \"lengths\" and \"angles\"");
    return {sequence_from_json(j.at("lengths")), sequence_from_json(j.at("angles"))};
}

nlohmann::json to_json(const FiniteRankHamiltonian& h) {
    return nlohmann::json{{"lengths", h.lengths}, {"angles", h.angles}};
}

FiniteRankHamiltonian finite_hamiltonian_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("lengths") || !j.contains("angles") || !j.at("lengths").is_array() ||
        !j.at("angles").is_array())
        fail(ErrorKind::validation, "finite-rank Hamiltonian needs \"lengths\" and \"angles\" arrays");
    FiniteRankHamiltonian f;
    try {
        f.lengths = j.at("lengths").get<std::vector<double>>();
        f.angles = j.at("angles").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::validation, std::string("finite-rank Hamiltonian: ") + e.what());
    }
    f.validate();
    return f;
}

}  // namespace canon
