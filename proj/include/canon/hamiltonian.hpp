#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canon/sequence.hpp"

namespace canon {

// Piecewise constant rank-one Hamiltonian: interval n has length l_n and direction angle phi_n.
struct HamburgerHamiltonian {
    SequenceSpec lengths;
    SequenceSpec angles;
};

struct FiniteRankHamiltonian {
    std::vector<double> lengths;
    std::vector<double> angles;

    std::size_t size() const noexcept { return lengths.size(); }
    // Positive lengths, equal sizes, consecutive angles distinct mod pi.
    void validate() const;
};

// One constant interval as seen by the transfer-matrix code.
struct Interval {
    double length;
    double cos_phi;
    double sin_phi;
};

// Streams intervals 1, 2, ... of a Hamiltonian without materializing them.
class IntervalCursor {
public:
    explicit IntervalCursor(const HamburgerHamiltonian& h);
    // Interval n (1-based); n must increase by one each call after the first.
    Interval next();
    Index position() const noexcept { return at_; }

private:
    SequenceCursor lengths_;
    AngleCursor angles_;
    Index at_ = 0;
};

// x_n = l_1 + ... + l_n with x_0 = 0, compensated summation.
double nodes(const HamburgerHamiltonian& h, Index n);
// x_0 .. x_n.
std::vector<double> node_table(const HamburgerHamiltonian& h, Index n);

enum class LimitKind { limit_circle, limit_point, undecided };

struct LimitClassification {
    LimitKind kind = LimitKind::undecided;
    std::optional<double> total_length;  // x_infinity estimate
    double error_bound = 0.0;            // absolute bound on the x_infinity estimate
    bool closed_form = false;            // decided from the rule itself
    std::string reason;
};

LimitClassification classify_limit(const HamburgerHamiltonian& h, Index horizon, double tolerance);

// Sum of l_n over n > N, exact for closed-form length rules, nullopt otherwise.
std::optional<Extended> length_tail(const HamburgerHamiltonian& h, Index after);

// |sin(phi_{n+1} - phi_n)| for n in [from, to]; throws invalid-hamiltonian on a zero.
std::vector<double> sin_diffs(const HamburgerHamiltonian& h, Index from, Index to);

// Checks l_n > 0 and phi_{n+1} != phi_n mod pi for n <= horizon.
void validate(const HamburgerHamiltonian& h, Index horizon);

// Copies the first n intervals into an explicit finite-rank Hamiltonian.
FiniteRankHamiltonian truncate(const HamburgerHamiltonian& h, Index n);

nlohmann::json to_json(const HamburgerHamiltonian& h);
HamburgerHamiltonian hamiltonian_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FiniteRankHamiltonian& h);
FiniteRankHamiltonian finite_hamiltonian_from_json(const nlohmann::json& j);

}  // namespace canon
