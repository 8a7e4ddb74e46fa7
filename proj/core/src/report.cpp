#include "klab/report.hpp"

#include <fstream>
#include <ostream>

#include "klab/error.hpp"

namespace klab {

namespace {

void write_cell(std::ostream& os, const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    os << s;
    return;
  }
  os << '"';
  for (char c : s) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

void write_row(std::ostream& os, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    write_cell(os, row[i]);
  }
  os << '\n';
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + p.string() + "'");
  return os;
}

// Scalars of a summary block as "key: value" pairs, nested objects inline.
void md_block(std::ostream& os, const nlohmann::json& block) {
  for (const auto& [k, v] : block.items()) {
    os << "- " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
}

}  // namespace

void write_csv(std::ostream& os, const Table& table) {
  write_row(os, table.columns);
  for (const auto& r : table.rows) write_row(os, r);
}

void write_table_json(std::ostream& os, const Table& table) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < table.columns.size() && i < r.size(); ++i) obj[table.columns[i]] = r[i];
    arr.push_back(std::move(obj));
  }
  os << arr.dump(1) << '\n';
}

void write_timings_csv(std::ostream& os, const ExperimentResult& result) {
  os << "row,wall_ms\n";
  for (std::size_t i = 0; i < result.wall_ms.size(); ++i) os << i << ',' << format_number(result.wall_ms[i]) << '\n';
}

void write_summary_json(std::ostream& os, const ExperimentResult& result) {
  nlohmann::json s = result.summary;
  s["invariants_ok"] = result.invariants_ok;
  s["warnings"] = result.warnings;
  os << s.dump(2) << '\n';
}

void write_report_md(std::ostream& os, const ExperimentResult& result) {
  const auto& cfg = result.config;
  os << "# klab " << to_string(cfg.experiment) << "\n\n## Configuration\n\n";
  const nlohmann::json cj = cfg.to_json();
  for (const auto& [k, v] : cj.items()) os << "- " << k << " = " << v.dump() << '\n';
  os << "\n## Results\n\n";
  os << "Trials recorded: " << result.trials.rows.size() << "\n\n";
  if (result.summary.contains("blocks")) {
    int i = 0;
    for (const auto& b : result.summary["blocks"]) {
      os << "### Block " << ++i << "\n\n";
      md_block(os, b);
      os << '\n';
    }
  }
  if (result.summary.contains("rows")) {
    os << "| d | f | kind | norm_sq | inf_K | bound | met | m(d) | log10 P |\n"
          "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : result.summary["rows"]) {
      os << "| " << r["d"] << " | " << r["f"] << " | " << r["kind"].get<std::string>() << " | " << r["norm_sq"]
         << " | " << r["inf_k"] << " | " << r["inf_k_bound"] << " | " << r["bound_met"] << " | " << r["m"] << " | "
         << r["log10_probability_bound"] << " |\n";
    }
    os << '\n';
  }
  for (const char* key : {"trend", "fitted_c", "ratio_spread_full", "ratio_spread_subspace",
                          "exceedance_slope_vs_log_d"}) {
    if (result.summary.contains(key)) os << "- " << key << ": " << result.summary[key].dump() << '\n';
  }
  os << "\nInvariants: " << (result.invariants_ok ? "all passed" : "VIOLATED") << '\n';
  if (!result.warnings.empty()) {
    os << "\n## Warnings\n\n";
    for (const auto& w : result.warnings) os << "- " << w << '\n';
  }
  os << "\nEstimates are desk-scale Monte Carlo values. Expected-count figures are p_hat times a packing "
        "count and do not verify any asymptotic rate.\n";
}

std::filesystem::path write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const bool json_table = result.config.format == "json";
  const auto table_path = dir / (json_table ? "trials.json" : "trials.csv");
  {
    auto os = open_out(table_path);
    if (json_table) write_table_json(os, result.trials);
    else write_csv(os, result.trials);
  }
  {
    auto os = open_out(dir / "timings.csv");
    write_timings_csv(os, result);
  }
  {
    auto os = open_out(dir / "summary.json");
    write_summary_json(os, result);
  }
  {
    auto os = open_out(dir / "report.md");
    write_report_md(os, result);
  }
  return table_path;
}

}  // namespace klab
