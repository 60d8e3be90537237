// canon: command-line front end for order analysis of Hamburger Hamiltonians.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "canon/bounds.hpp"
#include "canon/coverings.hpp"
#include "canon/error.hpp"
#include "canon/examples.hpp"
#include "canon/indices.hpp"
#include "canon/monodromy.hpp"
#include "canon/recurrence.hpp"

using namespace canon;
using nlohmann::json;

namespace {

constexpr const char* tool_version = "1.0.0";

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::parse, "'" + path + "' is not valid JSON: " + e.what());
    }
}

// Writes to a temporary file beside the target, then renames it into place.
void write_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
        out << text;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            fail(ErrorKind::io, "write to '" + path + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(ErrorKind::io, "cannot move output into '" + path + "'");
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") std::cout << text;
    else write_atomic(out, text);
}

class Stopwatch {
public:
    void lap(const std::string& stage) {
        const auto now = std::chrono::steady_clock::now();
        laps_[stage] = std::chrono::duration<double>(now - last_).count();
        last_ = now;
    }
    json to_json() const { return laps_; }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
    std::map<std::string, double> laps_;
};

// Where the Hamiltonian comes from: a builtin family or a JSON file.
struct Source {
    std::string family;
    std::map<std::string, double> params;
    std::string file;
    std::map<std::string, CLI::Option*> param_opts;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--family", family, "builtin family (see 'family list')");
        for (const char* p : {"alpha", "beta", "gamma", "q", "rho", "r"})
            param_opts[p] = cmd->add_option(std::string("--") + p, params[p], std::string("family parameter ") + p);
        cmd->add_option("--hamiltonian", file, "Hamiltonian JSON file");
    }

    FamilyParams given() const {
        FamilyParams out;
        for (const auto& [k, opt] : param_opts)
            if (opt->count() > 0) out[k] = params.at(k);
        return out;
    }

    bool is_family() const { return !family.empty(); }

    void check() const {
        if (family.empty() == file.empty())
            fail(ErrorKind::validation, "give exactly one of --family and --hamiltonian");
    }

    json echo() const {
        if (is_family()) return {{"family", family}, {"params", given()}};
        return {{"file", file}};
    }
};

struct Loaded {
    HamburgerHamiltonian h;
    std::optional<FamilyExpectation> expectation;
    json spec;
};

Loaded load(const Source& s) {
    s.check();
    Loaded out;
    if (s.is_family()) {
        auto f = builtin_family(s.family, s.given());
        out.h = f.hamiltonian;
        out.expectation = f.expectation;
    } else {
        out.h = hamiltonian_from_json(read_json(s.file));
    }
    out.spec = to_json(out.h);
    return out;
}

// --config support: flags from a JSON object are placed ahead of the real arguments.
struct ConfigInjection {
    std::vector<std::string> args;
    json objects = json::object();  // object-valued keys, handled by the subcommands
};

ConfigInjection config_args(const json& cfg) {
    if (!cfg.is_object()) fail(ErrorKind::parse, "config file must hold a JSON object");
    ConfigInjection out;
    auto scalar = [](const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        return os.str();
    };
    for (const auto& [key, v] : cfg.items()) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (v.is_object()) {
            out.objects[key] = v;
        } else if (v.is_boolean()) {
            if (v.get<bool>()) out.args.push_back(flag);
        } else if (v.is_array()) {
            for (const auto& x : v) {
                if (!x.is_primitive() || x.is_null() || x.is_boolean())
                    fail(ErrorKind::parse, "config key '" + key + "' must hold numbers or strings");
                out.args.push_back(flag);
                out.args.push_back(scalar(x));
            }
        } else if (v.is_null()) {
            fail(ErrorKind::parse, "config key '" + key + "' is null");
        } else {
            out.args.push_back(flag);
            out.args.push_back(scalar(v));
        }
    }
    return out;
}

OrderConfig order_config(const json& objects, std::optional<double> r_min, std::optional<double> r_max,
                         int grid_points, int threads) {
    OrderConfig c;
    if (objects.contains("order")) c = order_config_from_json(objects.at("order"));
    if (r_min) c.r_min = r_min;
    if (r_max) c.r_max = r_max;
    if (grid_points > 0) c.grid_points = grid_points;
    if (threads > 0) c.threads = threads;
    return c;
}

CoveringConfig covering_config(const json& objects, Index cut_positions) {
    CoveringConfig c;
    if (objects.contains("covering")) c = covering_config_from_json(objects.at("covering"));
    if (cut_positions > 0) c.cut_positions = cut_positions;
    return c;
}

std::string fixed(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

std::string ext(const Extended& e) { return e.is_infinite() ? "inf" : fixed(e.value()); }

void print_bound_table(std::ostream& os, const BoundsReport& b) {
    os << "bound                                              value      note\n";
    auto row = [&](const std::string& name, const std::string& v, const std::string& note) {
        os << name << std::string(name.size() < 51 ? 51 - name.size() : 1, ' ') << v
           << std::string(v.size() < 11 ? 11 - v.size() : 1, ' ') << note << "\n";
    };
    row("upper: lengths, angle differences, Lambda", fixed(b.upper.m2.value),
        std::string(region_name(b.upper.m2.region)) + (b.upper.m2.applicable ? "" : ", inapplicable"));
    row("upper: starred angle index and Lambda*", fixed(b.upper.m81.value),
        std::string(region_name(b.upper.m81.region)) + (b.upper.m81.applicable ? "" : ", inapplicable"));
    row("upper: convergence exponent of the lengths", fixed(b.upper.r27), "");
    row("lower: 1/delta_{l,phi}", ext(b.lower.r2), "");
    row("lower: 1/(delta_l + delta_phi)", ext(b.lower.r52), b.lower.r52_applicable ? "" : "inapplicable");
    row("order formula for regularly distributed data", b.r24.value ? fixed(*b.r24.value) : "-",
        std::string("case ") + r24_case_name(b.r24.which) + (b.r24.value ? "" : ": " + b.r24.reason));
}

json tool_json() { return {{"name", "canon"}, {"version", tool_version}}; }

}  // namespace

int run(int argc, char** argv) {
    // Pull out --config before CLI11 sees the arguments.
    std::vector<std::string> raw(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == "--config" && i + 1 < raw.size()) {
            config_path = raw[i + 1];
            raw.erase(raw.begin() + static_cast<long>(i), raw.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (raw[i].rfind("--config=", 0) == 0) {
            config_path = raw[i].substr(9);
            raw.erase(raw.begin() + static_cast<long>(i));
            break;
        }
    }
    ConfigInjection injected;
    if (!config_path.empty()) injected = config_args(read_json(config_path));
    if (!injected.args.empty()) {
        // Config flags go right after the subcommand (and its verb for 'family').
        std::size_t at = raw.empty() ? 0 : 1;
        if (!raw.empty() && raw[0] == "family" && raw.size() > 1 && raw[1].rfind("-", 0) != 0) at = 2;
        raw.insert(raw.begin() + static_cast<long>(std::min(at, raw.size())), injected.args.begin(),
                   injected.args.end());
    }

    CLI::App app{"Order analysis for Hamburger Hamiltonians, Jacobi matrices and moment sequences", "canon"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("--config", config_path, "JSON file of flag values; command-line flags win");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "indices, bounds and optional order estimates");
    Source a_src;
    a_src.add_to(analyze);
    Index a_horizon = 100'000;
    std::vector<std::string> a_estimate;
    std::string a_out, a_curve_csv, a_cov_csv;
    std::optional<double> a_rmin, a_rmax;
    int a_grid = 0, a_threads = 0;
    Index a_cut = 0;
    bool a_no_timing = false;
    analyze->add_option("--horizon", a_horizon, "index horizon")->check(CLI::Range(Index{64}, Index{50'000'000}));
    analyze->add_option("--estimate", a_estimate, "monodromy, coverings (repeatable)")
        ->check(CLI::IsMember({"monodromy", "coverings"}))
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    analyze->add_option("--out", a_out, "report path (default stdout)");
    analyze->add_option("--curve-csv", a_curve_csv, "growth curve CSV path");
    analyze->add_option("--covering-csv", a_cov_csv, "covering curve CSV path");
    analyze->add_option("--r-min", a_rmin, "smallest R of the growth grid");
    analyze->add_option("--r-max", a_rmax, "largest R of the growth grid");
    analyze->add_option("--grid-points", a_grid, "growth grid size");
    analyze->add_option("--cut-positions", a_cut, "covering cut positions");
    analyze->add_option("--threads", a_threads, "worker threads (default: CANON_THREADS or all cores)");
    analyze->add_flag("--no-timing", a_no_timing, "omit wall-clock timings");

    // convert
    auto* convert = app.add_subcommand("convert", "convert between moments, Jacobi parameters and Hamiltonians");
    std::string c_from, c_to, c_file, c_out;
    Index c_n = 0;
    convert->add_option("--from", c_from, "input kind")->required()->check(CLI::IsMember({"moments", "jacobi", "hamiltonian"}));
    convert->add_option("--to", c_to, "output kind")->required()->check(CLI::IsMember({"moments", "jacobi", "hamiltonian"}));
    convert->add_option("--file", c_file, "input JSON")->required();
    convert->add_option("--n", c_n, "size for rule Hamiltonians and truncations");
    convert->add_option("--out", c_out, "output path (default stdout)");

    // estimate-order
    auto* estimate = app.add_subcommand("estimate-order", "order estimate from monodromy growth or coverings");
    Source e_src;
    e_src.add_to(estimate);
    std::string e_method = "monodromy", e_out, e_csv;
    std::optional<double> e_rmin, e_rmax;
    int e_grid = 0, e_threads = 0;
    Index e_cut = 0;
    estimate->add_option("--method", e_method, "monodromy or coverings")->check(CLI::IsMember({"monodromy", "coverings"}));
    estimate->add_option("--out", e_out, "JSON output path (default stdout)");
    estimate->add_option("--csv", e_csv, "curve CSV path");
    estimate->add_option("--r-min", e_rmin, "smallest R of the growth grid");
    estimate->add_option("--r-max", e_rmax, "largest R of the growth grid");
    estimate->add_option("--grid-points", e_grid, "growth grid size");
    estimate->add_option("--cut-positions", e_cut, "covering cut positions");
    estimate->add_option("--threads", e_threads, "worker threads");

    // covering
    auto* covering = app.add_subcommand("covering", "covering costs, optimal coverings and the covering order");
    Source v_src;
    v_src.add_to(covering);
    Index v_n = 0, v_optimal = 0, v_cap = default_dp_cap, v_cut = 0;
    std::string v_covering, v_out, v_csv;
    covering->add_option("--n", v_n, "number of intervals for rule Hamiltonians");
    covering->add_option("--covering", v_covering, "covering JSON: node pairs, or {\"intervals\": [[a, b], ...]}");
    covering->add_option("--optimal", v_optimal, "optimal node covering with at most this many parts");
    covering->add_option("--cap", v_cap, "DP size cap after merging equal-tag runs");
    covering->add_option("--cut-positions", v_cut, "covering order: cut positions");
    covering->add_option("--out", v_out, "JSON output path (default stdout)");
    covering->add_option("--csv", v_csv, "covering curve CSV path (order mode)");

    // family
    auto* family = app.add_subcommand("family", "builtin families");
    family->require_subcommand(1);
    auto* f_list = family->add_subcommand("list", "list families and their constraints");
    auto* f_show = family->add_subcommand("show", "constraints, and expectations when parameters are given");
    bool f_json = false;
    f_list->add_flag("--json", f_json, "JSON output");
    std::string f_name, f_out;
    std::map<std::string, double> f_params;
    std::map<std::string, CLI::Option*> f_opts;
    f_show->add_option("name", f_name, "family name")->required();
    for (const char* p : {"alpha", "beta", "gamma", "q", "rho", "r"})
        f_opts[p] = f_show->add_option(std::string("--") + p, f_params[p], std::string("parameter ") + p);
    f_show->add_option("--out", f_out, "JSON output path (default stdout)");

    // certify-m29
    auto* certify = app.add_subcommand("certify-m29", "check the four scaling conditions of the upper-bound plan");
    Source m_src;
    m_src.add_to(certify);
    double m_d = 0.0;
    std::optional<double> m_phi, m_plan_r;
    Index m_horizon = 100'000;
    std::string m_out;
    certify->add_option("--d", m_d, "target order")->required();
    certify->add_option("--phi", m_phi, "prolongation angle (default: the limit angle, else 0)");
    certify->add_option("--horizon", m_horizon, "index horizon");
    certify->add_option("--plan-r", m_plan_r, "also export the plan at this R");
    certify->add_option("--out", m_out, "JSON output path (default stdout)");

    try {
        std::vector<std::string> reversed(raw.rbegin(), raw.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    for (const auto& [key, v] : injected.objects.items())
        if (key != "order" && key != "covering") fail(ErrorKind::parse, "config key '" + key + "' takes no object");

    if (*analyze) {
        Stopwatch sw;
        const auto in = load(a_src);
        sw.lap("load");
        json report;
        report["tool"] = tool_json();
        report["input"] = a_src.echo();
        report["input"]["hamiltonian"] = in.spec;
        report["input"]["horizon"] = a_horizon;
        if (in.expectation) report["expectation"] = to_json(*in.expectation);
        const auto idx = hamiltonian_indices(in.h, a_horizon);
        sw.lap("indices");
        report["indices"] = {{"method", "finite-horizon index estimators, closed forms where the rules allow"},
                             {"values", to_json(idx)}};
        const auto bounds = bounds_report(idx);
        sw.lap("bounds");
        report["bounds"] = {{"method", "bounds evaluated on the indices"}, {"values", to_json(bounds)}};
        bool want_mono = false, want_cov = false;
        for (const auto& e : a_estimate) (e == "monodromy" ? want_mono : want_cov) = true;
        if (want_mono) {
            const auto cfg = order_config(injected.objects, a_rmin, a_rmax, a_grid, a_threads);
            const auto est = order_estimate(in.h, cfg);
            sw.lap("monodromy");
            auto cj = to_json(cfg);
            report["rhoHat"] = {{"method", "slope of ln ln max|W_ij(iR)| against ln R"},
                                {"value", est.rho_hat},
                                {"config", cj},
                                {"result", to_json(est)}};
            if (!a_curve_csv.empty()) write_atomic(a_curve_csv, growth_curve_csv(est.curve));
        }
        if (want_cov) {
            const auto cfg = covering_config(injected.objects, a_cut);
            const auto o = order_from_coverings(in.h, cfg);
            sw.lap("coverings");
            report["dHat"] = {{"method", "smallest d with count O(R^d) and cost O(R^(d-1)) over optimal coverings"},
                              {"value", o.d_hat},
                              {"config", to_json(cfg)},
                              {"result", to_json(o)}};
            if (!a_cov_csv.empty()) write_atomic(a_cov_csv, covering_curve_csv(o.curve));
        }
        if (!a_no_timing) report["timing"] = sw.to_json();
        emit(a_out, dump(report));
        if (!a_out.empty() && a_out != "-") print_bound_table(std::cout, bounds);
        else print_bound_table(std::cerr, bounds);
        return 0;
    }

    if (*convert) {
        const json in = read_json(c_file);
        JacobiParameters j;
        std::optional<FiniteRankHamiltonian> finite;
        if (c_from == "moments") {
            j = moments_to_jacobi(moments_from_json(in));
        } else if (c_from == "jacobi") {
            j = jacobi_from_json(in);
        } else {
            const bool arrays = in.is_object() && in.contains("lengths") && in.at("lengths").is_array();
            if (arrays) {
                finite = finite_hamiltonian_from_json(in);
                if (c_to != "hamiltonian") j = jacobi_from_hamiltonian(*finite);
            } else {
                if (c_n < 1) fail(ErrorKind::validation, "--n is needed to convert a rule Hamiltonian");
                const auto h = hamiltonian_from_json(in);
                if (c_to == "hamiltonian") finite = truncate(h, c_n);
                else j = jacobi_from_hamiltonian(h, c_n);
            }
        }
        json out;
        if (c_to == "jacobi") {
            out = to_json(j);
        } else if (c_to == "moments") {
            out = to_json(jacobi_to_moments(j, c_n > 0 ? std::min(c_n, j.size()) : j.size()));
        } else {
            out = finite ? to_json(*finite) : to_json(hamiltonian_from_jacobi(j, c_n > 0 ? std::min(c_n, j.size()) : j.size()));
        }
        emit(c_out, dump(out));
        return 0;
    }

    if (*estimate) {
        const auto in = load(e_src);
        json out{{"tool", tool_json()}, {"input", e_src.echo()}, {"method", e_method}};
        if (e_method == "monodromy") {
            const auto cfg = order_config(injected.objects, e_rmin, e_rmax, e_grid, e_threads);
            const auto est = order_estimate(in.h, cfg);
            out["config"] = to_json(cfg);
            out["rhoHat"] = est.rho_hat;
            out["result"] = to_json(est);
            if (!e_csv.empty()) write_atomic(e_csv, growth_curve_csv(est.curve));
        } else {
            const auto cfg = covering_config(injected.objects, e_cut);
            const auto o = order_from_coverings(in.h, cfg);
            out["config"] = to_json(cfg);
            out["dHat"] = o.d_hat;
            out["result"] = to_json(o);
            if (!e_csv.empty()) write_atomic(e_csv, covering_curve_csv(o.curve));
        }
        emit(e_out, dump(out));
        return 0;
    }

    if (*covering) {
        v_src.check();
        std::optional<HamburgerHamiltonian> rule;
        DiagonalProjection p;
        bool have_projection = false;
        if (v_src.is_family()) {
            rule = builtin_family(v_src.family, v_src.given()).hamiltonian;
        } else {
            const json hj = read_json(v_src.file);
            if (hj.is_object() && hj.contains("lengths") && hj.at("lengths").is_array()) {
                p = diagonal_projections(finite_hamiltonian_from_json(hj));
                have_projection = true;
            } else {
                rule = hamiltonian_from_json(hj);
            }
        }
        const bool order_mode = v_covering.empty() && v_optimal == 0;
        json out{{"tool", tool_json()}, {"input", v_src.echo()}};
        if (order_mode) {
            if (!rule) fail(ErrorKind::validation, "the covering order needs a rule Hamiltonian");
            const auto cfg = covering_config(injected.objects, v_cut);
            const auto o = order_from_coverings(*rule, cfg);
            out["config"] = to_json(cfg);
            out["dHat"] = o.d_hat;
            out["result"] = to_json(o);
            if (!v_csv.empty()) write_atomic(v_csv, covering_curve_csv(o.curve));
            emit(v_out, dump(out));
            return 0;
        }
        if (!have_projection) {
            if (v_n < 1) fail(ErrorKind::validation, "--n is needed for a rule Hamiltonian");
            p = diagonal_projections(*rule, v_n);
        }
        out["intervals"] = p.size();
        if (!v_covering.empty()) {
            const json cj = read_json(v_covering);
            if (cj.is_object() && cj.contains("intervals")) {
                Covering c;
                for (const auto& part : cj.at("intervals")) {
                    if (!part.is_array() || part.size() != 2) fail(ErrorKind::validation, "interval must be [a, b]");
                    c.parts.emplace_back(part[0].get<double>(), part[1].get<double>());
                }
                const auto before = unaligned_cost(p, c);
                const auto refined = refine_to_nodes(p, c);
                const auto after = covering_cost(p, refined);
                out["given"] = {{"count", before.count}, {"cost", before.cost}};
                out["refined"] = {{"covering", to_json(refined)}, {"count", after.count}, {"cost", after.cost}};
            } else {
                const auto nc = node_covering_from_json(cj);
                const auto cost = covering_cost(p, nc);
                out["given"] = {{"covering", to_json(nc)}, {"count", cost.count}, {"cost", cost.cost}};
            }
        }
        if (v_optimal > 0) {
            const auto best = optimal_covering(p, v_optimal, v_cap);
            out["optimal"] = {{"maxParts", v_optimal},
                              {"covering", to_json(best.covering)},
                              {"count", best.covering.parts.size()},
                              {"cost", best.cost}};
        }
        emit(v_out, dump(out));
        return 0;
    }

    if (*f_list) {
        if (f_json) {
            json list = json::array();
            for (const auto& f : family_list()) list.push_back(to_json(f));
            std::cout << dump(list);
        } else {
            for (const auto& f : family_list()) {
                std::cout << f.name << " (";
                for (std::size_t i = 0; i < f.params.size(); ++i) std::cout << (i ? ", " : "") << f.params[i];
                std::cout << ")\n    constraints: " << f.constraints << "\n    " << f.description << "\n";
            }
        }
        return 0;
    }

    if (*f_show) {
        const auto& info = family_info(f_name);
        json out = to_json(info);
        FamilyParams given;
        for (const auto& [k, opt] : f_opts)
            if (opt->count() > 0) given[k] = f_params.at(k);
        if (!given.empty()) {
            const auto f = builtin_family(f_name, given);
            out["expectation"] = to_json(f.expectation);
            out["hamiltonian"] = to_json(f.hamiltonian);
        }
        emit(f_out, dump(out));
        return 0;
    }

    if (*certify) {
        const auto in = load(m_src);
        const auto idx = hamiltonian_indices(in.h, m_horizon);
        const double phi = m_phi ? *m_phi : idx.limit_angle.value_or(0.0);
        const auto s = plan_surrogates(in.h, idx, phi);
        const auto bounds = bounds_report(idx);
        const auto cert = certify_m29(in.h, s, phi, m_d);
        json out{{"tool", tool_json()},
                 {"input", m_src.echo()},
                 {"upperM2", to_json(bounds.upper.m2)},
                 {"certificate", to_json(cert)}};
        if (m_plan_r) out["plan"] = to_json(build_m2_plan(in.h, s, phi, m_d, *m_plan_r).plan);
        emit(m_out, dump(out));
        std::cerr << "certificate at d = " << fixed(m_d) << ": " << (cert.pass ? "pass" : "fail") << " (exponents "
                  << fixed(cert.e_i) << ", " << fixed(cert.e_ii) << ", " << fixed(cert.e_iii) << ", "
                  << fixed(cert.e_iv) << ")\n";
        return 0;
    }
    return 0;
}

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "canon: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        std::cerr << "canon: parse-error: " << e.what() << "\n";
        return 2;
    } catch (const std::bad_alloc&) {
        std::cerr << "canon: numeric-failure: out of memory\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "canon: numeric-failure: " << e.what() << "\n";
        return 4;
    }
}
