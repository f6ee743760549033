#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "spm/coulomb_mc.hpp"
#include "spm/density.hpp"
#include "spm/one_cut.hpp"
#include "spm/symmetric.hpp"
#include "spm/two_cut.hpp"

namespace spm {

using Json = nlohmann::ordered_json;

// 17 significant digits, so values round-trip exactly.
std::string format_number(double v);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

Json solution_json(const TwoCutSolution& sol);
Json symmetric_json(const SymmetricSolution& sol);
Json one_cut_json(const OneCutSolution& sol);
Json constraint_json(const ConstraintReport& rep);
Json comparison_json(const ComparisonMetrics& m);
Json summary_json(const Summary& s);
Json diagnostics_json(const RunResult& r);
Json error_json(const std::string& kind, const std::string& message);

// Exit codes: 0 ok, 2 infeasible parameters, 3 no convergence, 4 configuration error,
// 1 anything else.
int exit_code_for(const std::exception& e);
std::string error_kind(const std::exception& e);

// Flat "key = value" text; blank lines and lines starting with '#' are skipped.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::string& path);

double kv_double(const KeyValues& kv, const std::string& key, double fallback);
long kv_long(const KeyValues& kv, const std::string& key, long fallback);
std::string kv_string(const KeyValues& kv, const std::string& key, const std::string& fallback);

// Known keys: N a A m beta_D eps seed sweeps burn_in thin raw_energy
// anneal_tterm anneal_kappa0 anneal_cycles. Unknown keys are a configuration error.
MCConfig mc_config_from(const KeyValues& kv);
KeyValues to_key_values(const MCConfig& c);
void write_key_values(std::ostream& out, const KeyValues& kv);

}  // namespace spm
