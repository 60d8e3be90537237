#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canon/hamiltonian.hpp"

namespace canon {

using FamilyParams = std::map<std::string, double>;

// One expected quantity: an exact value, or bounds (either side may be open).
struct Expectation {
    std::string quantity;  // "rho", "delta_l", "delta_phi", "Delta_l_plus", "convergence_exponent", "leading_limsup"
    std::optional<double> value;
    std::optional<double> lower, upper;
    bool strict_upper = false;
    std::string source;    // which statement the value comes from
};

struct FamilyExpectation {
    std::string family;
    FamilyParams params;  // as given, plus derived parameters
    std::vector<Expectation> expectations;

    const Expectation* find(const std::string& quantity) const;
};

struct Family {
    HamburgerHamiltonian hamiltonian;
    FamilyExpectation expectation;
};

struct FamilyInfo {
    std::string name;
    std::vector<std::string> params;
    std::string constraints;
    std::string description;
};

// l_n = n^-alpha, phi_1 = 0, phi_{n+1} - phi_n = n^-beta. alpha > 1, beta >= 0.
Family power_like(double alpha, double beta);
// l_n = n^-alpha, angle steps pi/2. alpha > 1.
Family jumping(double alpha);
// Lengths and angle steps alternating on dyadic blocks [2^k, 2^{k+1}):
// even k: n^-alpha and pi/2, odd k: n^-beta and n^-gamma.
// alpha > beta > 1, gamma > 0, beta + gamma/2 < alpha < beta + 2 gamma.
Family r36(double alpha, double beta, double gamma);
// l_1 = 1, l_n = (n ln^2 n)^-beta on multiples of q and (n ln^2 n)^-alpha otherwise, phi_n = n pi/2.
// alpha >= 1, beta > alpha, integer q >= 2.
Family hq(int q, double alpha, double beta);
// The diagonal family of given order rho whose leading coefficients have limsup r: q = 3, alpha = 1/rho,
// beta = q/r - (q - 1) alpha. 0 < r < rho <= 1.
Family livcounter(double rho, double r);

// Dispatch by name; unknown names, missing or unknown parameters and violated constraints are
// validation errors quoting the constraint.
Family builtin_family(const std::string& name, const FamilyParams& params);

std::vector<FamilyInfo> family_list();
const FamilyInfo& family_info(const std::string& name);

nlohmann::json to_json(const Expectation& e);
nlohmann::json to_json(const FamilyExpectation& e);
nlohmann::json to_json(const FamilyInfo& f);

}  // namespace canon
