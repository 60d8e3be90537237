#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canon/hamiltonian.hpp"
#include "canon/indices.hpp"

namespace canon {

// g(x, y, z) = (1 - y + z/2) / (x - y + z) on D = {x >= 1, y >= 0, z >= 0, y <= z + 1, x - y + z > 0}.
// z = inf gives the limit 1/2.
double g_value(double x, double y, Extended z);

enum class Region { generic, critical };

struct UpperBound {
    double value = 1.0;
    Region region = Region::generic;
    bool applicable = true;
    std::string note;
};

struct UpperBounds {
    UpperBound m2;    // from (Delta_l^+, Delta_phi, Lambda)
    UpperBound m81;   // from (Delta_l^+, Delta_phi^*, Lambda^*)
    double r27 = 1.0; // convergence exponent of the lengths
};

struct LowerBounds {
    Extended r2;                  // 1 / delta_{l,phi}
    Extended r52;                 // 1 / (delta_l + delta_phi)
    bool r52_applicable = false;  // one of delta_l, delta_phi is a limit
};

enum class R24Case { A, B, none };

struct OrderFormula {
    std::optional<double> value;
    R24Case which = R24Case::none;
    std::string reason;
};

struct BoundsOptions {
    // Estimated (not closed-form) indices count as equal to a boundary value within this distance.
    double tolerance = 0.05;
};

UpperBounds upper_bound(const HamiltonianIndices& idx, const BoundsOptions& opt = {});
LowerBounds lower_bound(const HamiltonianIndices& idx);
OrderFormula order_formula_r24(const HamiltonianIndices& idx, const BoundsOptions& opt = {});

struct BoundsReport {
    UpperBounds upper;
    LowerBounds lower;
    OrderFormula r24;
};

BoundsReport bounds_report(const HamiltonianIndices& idx, const BoundsOptions& opt = {});

// Finite stand-ins for the indices entering the plan; infinite values are replaced by the cap.
struct PlanSurrogates {
    double Delta_l = 1.0;
    double Delta_l_plus = 1.0;
    double Delta_phi = 0.0;   // Delta_phi'
    double Lambda_phi = 0.0;  // Lambda(phi)'
    bool Delta_phi_capped = false;
    bool Lambda_capped = false;
};

struct PlanOptions {
    double surrogate_cap = 10.0;
    bool check_target_order = true;  // reject d violating the strict lower bound on the target order
    Index lambda_horizon = 100'000;  // for the estimate of Lambda(phi) when no closed form exists
};

// Lambda(phi) from the rule when available, else estimated at the horizon.
PlanSurrogates plan_surrogates(const HamburgerHamiltonian& h, const HamiltonianIndices& idx, double phi,
                               const PlanOptions& opt = {});

// Strict lower bound the target order d must exceed for the given surrogates.
double target_order_bound(const PlanSurrogates& s);

struct M2Plan {
    double R = 0.0;
    Index N = 0;          // cut-off N(R); the plan has N + 1 intervals
    double phi = 0.0;     // angle of the prolongation
    double d = 0.0;
    double sigma = 0.0;   // 1 / (Delta_l^+ + Delta_phi')
    PlanSurrogates surrogates;
    std::vector<double> weights_sq;  // a_n(R)^2, n = 1 .. N + 1
};

struct M2PlanResult {
    M2Plan plan;
    FiniteRankHamiltonian hamiltonian;  // l_1..l_N, phi_1..phi_N, then (x_inf - x_N, phi)
};

M2PlanResult build_m2_plan(const HamburgerHamiltonian& h, const PlanSurrogates& s, double phi, double d, double R,
                           const PlanOptions& opt = {});

struct CertificateOptions {
    std::vector<double> R_grid;  // empty: 8 geometric points over [1e6, 1e18]
    double tolerance = 0.05;
    Index tail_factor = 16;      // the tail in (i) is summed to tail_factor * N, then continued
};

struct CertificatePoint {
    double R = 0.0;
    Index N = 0;
    double sums[4] = {0, 0, 0, 0};  // conditions (i)..(iv)
};

struct Certificate {
    double d = 0.0;
    double phi = 0.0;
    PlanSurrogates surrogates;
    std::vector<CertificatePoint> points;
    double e_i = 0.0, e_ii = 0.0, e_iii = 0.0, e_iv = 0.0;  // fitted slopes of ln sum against ln R
    bool pass_i = false, pass_ii = false, pass_iii = false, pass_iv = false;
    bool pass = false;
};

Certificate certify_m29(const HamburgerHamiltonian& h, const PlanSurrogates& s, double phi, double d,
                        const CertificateOptions& opt = {});

const char* region_name(Region r) noexcept;
const char* r24_case_name(R24Case c) noexcept;

nlohmann::json to_json(const UpperBound& b);
nlohmann::json to_json(const BoundsReport& r);
nlohmann::json to_json(const PlanSurrogates& s);
nlohmann::json to_json(const M2Plan& p);
nlohmann::json to_json(const Certificate& c);

}  // namespace canon
