#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canon/extended.hpp"
#include "canon/hamiltonian.hpp"

namespace canon {

// G(n; y, alpha) = -(alpha ln y_n + sum_{k<n} ln y_k) / (n ln n).
double G_value(const SequenceSpec& y, Index n, double alpha);
double G_value(const std::vector<double>& y, Index n, double alpha);  // y[0] = y_1

struct GrowthOptions {
    double infinity_threshold = 64.0;  // exponents above this are reported as +inf
    int window_blocks = 4;             // sliding window of dyadic blocks for the pointwise envelope
    int averages_per_octave = 4;
};

struct GrowthReport {
    Index horizon = 0;
    double alpha = 0.0;
    Extended delta_star_hat;     // pointwise decay exponent
    Extended delta_avg_hat;      // decay exponent of (1/n) sum_{k=n}^{2n-1} y_k
    Extended delta_liminf_hat;   // liminf of G, nuisance-corrected
    double delta_liminf_raw = 0.0;  // min of G over [N/2, N]
    double delta_limsup_hat = 0.0;
    double G_at_horizon = 0.0;
    double drift_star = 0.0;
    double drift_avg = 0.0;
    double drift_liminf = 0.0;
    bool converged = true;
    std::vector<std::string> warnings;
};

// Needs y_1 .. y_{2 horizon - 1} for the averaged exponent.
GrowthReport growth_exponents(const SequenceSpec& y, double alpha, Index horizon, const GrowthOptions& opt = {});
GrowthReport growth_exponents(const std::vector<double>& y, double alpha, Index horizon, const GrowthOptions& opt = {});

enum class Regularity { regular, irregular, undecided };

struct RegularityReport {
    double sup_ratio = 0.0;     // max_n y_n / (prod_{k<=n} y_k)^{1/n}
    double growth_slope = 0.0;  // fitted power of n of the blockwise maxima of the ratio
    Regularity verdict = Regularity::undecided;
};

RegularityReport regularity_ratio(const SequenceSpec& y, Index horizon);
RegularityReport regularity_ratio(const std::vector<double>& y);

// Exponents read off a rule built from power laws, constants and (residue or dyadic) blocks of them.
struct RuleProfile {
    double pointwise = 0.0;   // Delta* = Delta
    double liminf = 0.0;      // delta(y, alpha) for every alpha
    double limsup = 0.0;
    bool regular = false;
};

std::optional<RuleProfile> rule_profile(const SequenceSpec& y);
// Profile of |sin(increment_n)| for an arithmetic-step angle rule.
std::optional<RuleProfile> sin_step_profile(const SequenceSpec& angles);

struct LambdaOptions {
    Index extent_factor = 4;  // tail sums run to extent_factor * horizon plus a length-tail correction
    double infinity_threshold = 64.0;
    bool relaxed = false;     // accept equal consecutive angles
};

// sup{tau : sum_{j>=n} l_j |sin(phi_j - phi)| = O(n^{1 - Delta_l^+ - tau})}; Delta_l^+ is estimated
// from the lengths when not given.
Extended lambda_at(const HamburgerHamiltonian& h, double phi, Index horizon,
                   std::optional<Extended> delta_l_plus = std::nullopt, const LambdaOptions& opt = {});

// Lambda(phi) from the rule parameters (arithmetic-step angles over power-law lengths), nullopt
// when the rule is not covered.
std::optional<double> lambda_closed_at(const HamburgerHamiltonian& h, double phi);

// Limit of phi_n mod pi when the angles converge, otherwise nullopt.
std::optional<double> limit_angle(const HamburgerHamiltonian& h, Index horizon);

struct IndexValue {
    Extended value;        // closed form when available, else the estimate
    Extended estimate;     // numerical estimate at the horizon
    bool closed_form = false;
    double drift = 0.0;
};

struct HamiltonianIndices {
    Index horizon = 0;
    IndexValue Delta_l, Delta_l_plus, Delta_phi, Delta_phi_star, Lambda, Lambda_star;
    IndexValue delta_l, delta_phi, delta_l_phi;
    IndexValue delta_l_sup, delta_phi_sup;
    bool delta_l_is_limit = false;
    bool delta_phi_is_limit = false;
    IndexValue convergence_exponent;  // inf{p : l in l^p}
    std::optional<double> limit_angle;
    double lambda_argmax = 0.0;       // angle attaining the grid supremum of Lambda
    Regularity lengths_regularity = Regularity::undecided;
    Regularity sin_regularity = Regularity::undecided;
    std::vector<std::string> warnings;
};

struct IndicesOptions {
    int lambda_grid = 64;
    double limit_tolerance = 0.05;  // liminf and limsup closer than this count as a limit
    GrowthOptions growth;
    LambdaOptions lambda;
};

HamiltonianIndices hamiltonian_indices(const HamburgerHamiltonian& h, Index horizon, const IndicesOptions& opt = {});

const char* regularity_name(Regularity r) noexcept;

// Infinite values serialize as the string "inf".
nlohmann::json extended_json(const Extended& e);
Extended extended_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GrowthReport& r);
nlohmann::json to_json(const RegularityReport& r);
nlohmann::json to_json(const IndexValue& v);
nlohmann::json to_json(const HamiltonianIndices& idx);

}  // namespace canon
