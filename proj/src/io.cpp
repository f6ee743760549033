#include "spm/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "spm/errors.hpp"

namespace spm {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (k) out << ',';
        out << fields[k];
    }
    out << '\n';
}

Json solution_json(const TwoCutSolution& sol) {
    const auto x = sol.support.endpoints();
    return Json{{"a", sol.params.a},
                {"A", sol.params.A},
                {"m", sol.params.m},
                {"endpoints", std::vector<double>(x.begin(), x.end())},
                {"alpha", sol.alpha},
                {"residual_norm", sol.residual_norm}};
}

Json symmetric_json(const SymmetricSolution& sol) {
    return Json{{"A", sol.A}, {"s", sol.s}, {"x3", sol.x3}, {"x4", sol.x4}};
}

Json one_cut_json(const OneCutSolution& sol) {
    return Json{{"a", sol.params.a},
                {"A", sol.params.A},
                {"endpoints", {sol.support.y1, sol.support.y2}},
                {"gamma", sol.gamma},
                {"residual_norm", sol.residual_norm},
                {"traceless_residual", sol.traceless_residual},
                {"min_density", sol.min_density}};
}

Json constraint_json(const ConstraintReport& rep) {
    return Json{{"norm", rep.norm},
                {"trace", rep.trace},
                {"susceptibility", rep.susceptibility},
                {"min_density", rep.min_density},
                {"min_location", rep.min_location}};
}

Json comparison_json(const ComparisonMetrics& m) {
    return Json{{"l1", m.l1},
                {"sup", m.sup},
                {"cut_mass_empirical", m.cut_mass_empirical},
                {"cut_mass_analytic", m.cut_mass_analytic},
                {"outside_fraction", m.outside_fraction},
                {"support_warning", m.support_warning}};
}

Json summary_json(const Summary& s) {
    return Json{{"mean", s.mean}, {"min", s.min}, {"max", s.max}, {"last", s.last}, {"count", s.count}};
}

Json diagnostics_json(const RunResult& r) {
    return Json{{"acceptance", r.acceptance},
                {"epsilon_final", r.eps_final},
                {"energy_trace_summary", summary_json(r.energy)},
                {"n_left_trace_summary", summary_json(r.n_left)},
                {"max_sum_violation", r.max_sum_violation},
                {"max_energy_drift", r.max_energy_drift},
                {"steps", r.steps}};
}

Json error_json(const std::string& kind, const std::string& message) {
    return Json{{"error", kind}, {"message", message}};
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const Infeasible*>(&e)) return "infeasible";
    if (dynamic_cast<const InvalidSupport*>(&e)) return "invalid-support";
    if (dynamic_cast<const OutOfRange*>(&e)) return "out-of-range";
    if (dynamic_cast<const NoConvergence*>(&e)) return "no-convergence";
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const PoleError*>(&e)) return "pole";
    return "internal";
}

int exit_code_for(const std::exception& e) {
    const std::string k = error_kind(e);
    if (k == "infeasible" || k == "invalid-support" || k == "out-of-range") return 2;
    if (k == "no-convergence") return 3;
    if (k == "config") return 4;
    return 1;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const std::set<std::string> kMcKeys = {"N",    "a",       "A",          "m",            "beta_D",
                                       "eps",  "seed",    "sweeps",     "burn_in",      "thin",
                                       "raw_energy", "anneal_tterm", "anneal_kappa0", "anneal_cycles"};

}  // namespace

KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        kv[key] = trim(t.substr(eq + 1));
    }
    return kv;
}

KeyValues read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    return parse_key_values(in);
}

double kv_double(const KeyValues& kv, const std::string& key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": not a number: " + it->second);
    }
}

long kv_long(const KeyValues& kv, const std::string& key, long fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        std::size_t used = 0;
        const long v = std::stol(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": not an integer: " + it->second);
    }
}

std::string kv_string(const KeyValues& kv, const std::string& key, const std::string& fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

MCConfig mc_config_from(const KeyValues& kv) {
    for (const auto& [k, v] : kv) {
        if (!kMcKeys.count(k)) throw ConfigError("unknown key " + k);
    }
    MCConfig c;
    c.N = static_cast<int>(kv_long(kv, "N", c.N));
    c.params.a = kv_double(kv, "a", c.params.a);
    c.params.A = kv_double(kv, "A", c.params.A);
    c.params.m = static_cast<int>(kv_long(kv, "m", c.params.m));
    c.beta_D = kv_double(kv, "beta_D", c.beta_D);
    c.eps = kv_double(kv, "eps", c.eps);
    if (kv.count("seed")) {
        try {
            c.seed = std::stoull(kv.at("seed"));
        } catch (const std::exception&) {
            throw ConfigError("key seed: not an unsigned integer");
        }
    }
    c.sweeps = kv_long(kv, "sweeps", c.sweeps);
    c.burn_in = kv_long(kv, "burn_in", c.burn_in);
    c.thin = static_cast<int>(kv_long(kv, "thin", c.thin));
    c.raw_energy = kv_long(kv, "raw_energy", 0) != 0;
    if (kv.count("anneal_tterm") || kv.count("anneal_kappa0") || kv.count("anneal_cycles")) {
        AnnealConfig an;
        an.T_term = kv_long(kv, "anneal_tterm", an.T_term);
        an.kappa0 = kv_double(kv, "anneal_kappa0", an.kappa0);
        an.cycles = static_cast<int>(kv_long(kv, "anneal_cycles", an.cycles));
        c.anneal = an;
    }
    c.validate();
    return c;
}

KeyValues to_key_values(const MCConfig& c) {
    KeyValues kv{{"N", std::to_string(c.N)},
                 {"a", format_number(c.params.a)},
                 {"A", format_number(c.params.A)},
                 {"m", std::to_string(c.params.m)},
                 {"beta_D", format_number(c.beta_D)},
                 {"eps", format_number(c.eps)},
                 {"seed", std::to_string(c.seed)},
                 {"sweeps", std::to_string(c.sweeps)},
                 {"burn_in", std::to_string(c.burn_in)},
                 {"thin", std::to_string(c.thin)},
                 {"raw_energy", c.raw_energy ? "1" : "0"}};
    if (c.anneal) {
        kv["anneal_tterm"] = std::to_string(c.anneal->T_term);
        kv["anneal_kappa0"] = format_number(c.anneal->kappa0);
        kv["anneal_cycles"] = std::to_string(c.anneal->cycles);
    }
    return kv;
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

}  // namespace spm
