#include "canon/examples.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "canon/error.hpp"

namespace canon {

namespace {

using std::numbers::pi;

std::string num(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

void require(bool ok, const std::string& family, const std::string& constraint, const std::string& got) {
    if (!ok) fail(ErrorKind::validation, family + " requires " + constraint + " (got " + got + ")");
}

Expectation exact(std::string quantity, double v, std::string source) {
    Expectation e;
    e.quantity = std::move(quantity);
    e.value = v;
    e.source = std::move(source);
    return e;
}

Expectation bounded(std::string quantity, std::optional<double> lo, std::optional<double> hi, bool strict_hi,
                    std::string source) {
    Expectation e;
    e.quantity = std::move(quantity);
    e.lower = lo;
    e.upper = hi;
    e.strict_upper = strict_hi;
    e.source = std::move(source);
    return e;
}

SequenceSpec log_power(double tau) { return SequenceSpec::power(tau, 2 * tau, 1.0, 1.0); }

const std::vector<FamilyInfo>& infos() {
    static const std::vector<FamilyInfo> list{
        {"power_like", {"alpha", "beta"}, "alpha > 1, beta >= 0",
         "l_n = n^-alpha; angles are partial sums of the steps n^-beta"},
        {"jumping", {"alpha"}, "alpha > 1", "l_n = n^-alpha; angle steps pi/2"},
        {"r36", {"alpha", "beta", "gamma"}, "alpha > beta > 1, gamma > 0, beta + gamma/2 < alpha < beta + 2 gamma",
         "lengths n^-alpha with steps pi/2 on even dyadic blocks, n^-beta with steps n^-gamma on odd blocks"},
        {"hq", {"q", "alpha", "beta"}, "integer q >= 2, alpha >= 1, beta > alpha",
         "diagonal: l_1 = 1, (n ln^2 n)^-beta on multiples of q, (n ln^2 n)^-alpha elsewhere; phi_n = n pi/2"},
        {"livcounter", {"rho", "r"}, "0 < r < rho <= 1",
         "hq with q = 3, alpha = 1/rho, beta = q/r - (q - 1) alpha: order rho, leading-coefficient limsup r"},
    };
    return list;
}

}  // namespace

const Expectation* FamilyExpectation::find(const std::string& quantity) const {
    for (const auto& e : expectations)
        if (e.quantity == quantity) return &e;
    return nullptr;
}

Family power_like(double alpha, double beta) {
    require(alpha > 1.0, "power_like", "alpha > 1", "alpha = " + num(alpha));
    require(beta >= 0.0, "power_like", "beta >= 0", "beta = " + num(beta));
    Family f;
    f.hamiltonian = {SequenceSpec::power(alpha), SequenceSpec::arithmetic_step(0.0, SequenceSpec::power(beta))};
    auto& e = f.expectation;
    e.family = "power_like";
    e.params = {{"alpha", alpha}, {"beta", beta}};
    const std::string src = "power-like lengths and angle differences";
    e.expectations = {exact("delta_l", alpha, src), exact("Delta_l_plus", alpha, src), exact("delta_phi", beta, src),
                      exact("Delta_phi", beta, src), exact("Delta_phi_star", beta, src)};
    if (alpha + beta >= 2.0)
        e.expectations.push_back(exact("rho", 1.0 / (alpha + beta), "power-like order, alpha + beta >= 2"));
    else
        e.expectations.push_back(bounded("rho", 1.0 / (alpha + beta), (1.0 - beta) / (alpha - beta), false,
                                         "power-like bounds, alpha + beta < 2"));
    return f;
}

Family jumping(double alpha) {
    require(alpha > 1.0, "jumping", "alpha > 1", "alpha = " + num(alpha));
    Family f;
    f.hamiltonian = {SequenceSpec::power(alpha), SequenceSpec::arithmetic_step(0.0, SequenceSpec::constant(pi / 2))};
    auto& e = f.expectation;
    e.family = "jumping";
    e.params = {{"alpha", alpha}};
    const std::string src = "jumping angles: 1/delta_l <= rho <= 1/Delta_l^+";
    e.expectations = {exact("delta_l", alpha, src), exact("Delta_l_plus", alpha, src), exact("delta_phi", 0.0, src),
                      exact("rho", 1.0 / alpha, src)};
    return f;
}

Family r36(double alpha, double beta, double gamma) {
    const std::string got = "alpha = " + num(alpha) + ", beta = " + num(beta) + ", gamma = " + num(gamma);
    require(beta > 1.0, "r36", "beta > 1", got);
    require(alpha > beta, "r36", "alpha > beta", got);
    require(gamma > 0.0, "r36", "gamma > 0", got);
    require(beta + gamma / 2 < alpha, "r36", "beta + gamma/2 < alpha", got);
    require(alpha < beta + 2 * gamma, "r36", "alpha < beta + 2 gamma", got);
    Family f;
    auto l = make_block(2, BlockIndexing::dyadic, {{0, SequenceSpec::power(alpha)}, {1, SequenceSpec::power(beta)}});
    auto step = make_block(2, BlockIndexing::dyadic,
                           {{0, SequenceSpec::constant(pi / 2)}, {1, SequenceSpec::power(gamma)}});
    f.hamiltonian = {l, SequenceSpec::arithmetic_step(0.0, step)};
    auto& e = f.expectation;
    e.family = "r36";
    e.params = {{"alpha", alpha}, {"beta", beta}, {"gamma", gamma}};
    const double dl = (2 * beta + alpha) / 3, dp = gamma / 3;
    const std::string src = "dyadic blocks with alternating length and angle regimes";
    e.expectations = {exact("delta_l", dl, src), exact("delta_phi", dp, src),
                      bounded("rho", std::nullopt, std::max(1.0 / alpha, 1.0 / (beta + gamma)), false,
                              "blockwise monodromy bound"),
                      bounded("rho", std::nullopt, 1.0 / (dl + dp), true, "order strictly below 1/(delta_l + delta_phi)")};
    return f;
}

Family hq(int q, double alpha, double beta) {
    const std::string got = "q = " + std::to_string(q) + ", alpha = " + num(alpha) + ", beta = " + num(beta);
    require(q >= 2, "hq", "integer q >= 2", got);
    require(alpha >= 1.0, "hq", "alpha >= 1", got);
    require(beta > alpha, "hq", "beta > alpha", got);
    Family f;
    f.hamiltonian = {make_block(q, BlockIndexing::residue, {{0, log_power(beta)}}, log_power(alpha)),
                     SequenceSpec::arithmetic_step(pi / 2, SequenceSpec::constant(pi / 2))};
    auto& e = f.expectation;
    e.family = "hq";
    e.params = {{"q", q}, {"alpha", alpha}, {"beta", beta}};
    const double dl = ((q - 1) * alpha + beta) / q;
    const std::string src = "diagonal residue-block lengths";
    e.expectations = {exact("delta_l", dl, src), exact("Delta_l_plus", alpha, src),
                      exact("convergence_exponent", 1.0 / alpha, src),
                      exact("rho", q == 2 ? 1.0 / dl : 1.0 / alpha,
                            q == 2 ? "diagonal residue blocks, q = 2: rho = 1/delta_l"
                                   : "diagonal residue blocks, q >= 3: rho = 1/alpha")};
    return f;
}

Family livcounter(double rho, double r) {
    const std::string got = "rho = " + num(rho) + ", r = " + num(r);
    require(rho > 0.0 && rho <= 1.0, "livcounter", "0 < rho <= 1", got);
    require(r > 0.0 && r < rho, "livcounter", "0 < r < rho", got);
    const double alpha = 1.0 / rho;
    int q = 3;
    while (q / r - (q - 1) * alpha <= alpha) ++q;
    const double beta = q / r - (q - 1) * alpha;
    Family f = hq(q, alpha, beta);
    auto& e = f.expectation;
    e.family = "livcounter";
    e.params = {{"rho", rho}, {"r", r}, {"q", q}, {"alpha", alpha}, {"beta", beta}};
    e.expectations.push_back(exact("leading_limsup", r, "limsup n ln n / ln(1/b_{n,n}) = 1/delta_l"));
    return f;
}

Family builtin_family(const std::string& name, const FamilyParams& params) {
    const auto& info = family_info(name);
    for (const auto& [k, v] : params) {
        (void)v;
        if (std::find(info.params.begin(), info.params.end(), k) == info.params.end())
            fail(ErrorKind::validation, "family " + name + " has no parameter '" + k + "'");
    }
    auto get = [&](const std::string& k) {
        auto it = params.find(k);
        if (it == params.end()) fail(ErrorKind::validation, "family " + name + " needs parameter '" + k + "'");
        if (!std::isfinite(it->second)) fail(ErrorKind::validation, "parameter '" + k + "' must be finite");
        return it->second;
    };
    if (name == "power_like") return power_like(get("alpha"), get("beta"));
    if (name == "jumping") return jumping(get("alpha"));
    if (name == "r36") return r36(get("alpha"), get("beta"), get("gamma"));
    if (name == "hq") {
        const double q = get("q");
        require(q == std::floor(q) && q < 1e6, "hq", "integer q >= 2", "q = " + num(q));
        return hq(static_cast<int>(q), get("alpha"), get("beta"));
    }
    return livcounter(get("rho"), get("r"));
}

std::vector<FamilyInfo> family_list() { return infos(); }

const FamilyInfo& family_info(const std::string& name) {
    for (const auto& f : infos())
        if (f.name == name) return f;
    fail(ErrorKind::validation, "unknown family '" + name + "' (known: power_like, jumping, r36, hq, livcounter)");
}

nlohmann::json to_json(const Expectation& e) {
    nlohmann::json j{{"quantity", e.quantity}, {"source", e.source}};
    if (e.value) j["value"] = *e.value;
    if (e.lower) j["lower"] = *e.lower;
    if (e.upper) {
        j["upper"] = *e.upper;
        j["strictUpper"] = e.strict_upper;
    }
    return j;
}

nlohmann::json to_json(const FamilyExpectation& e) {
    auto list = nlohmann::json::array();
    for (const auto& x : e.expectations) list.push_back(to_json(x));
    return {{"family", e.family}, {"params", e.params}, {"expectations", list}};
}

nlohmann::json to_json(const FamilyInfo& f) {
    return {{"name", f.name}, {"params", f.params}, {"constraints", f.constraints}, {"description", f.description}};
}

}  // namespace canon
