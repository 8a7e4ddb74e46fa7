#pragma once

// Output files of an experiment run: trials.csv (or trials.json),
// timings.csv, summary.json and report.md.

#include <filesystem>
#include <iosfwd>

#include "klab/experiments.hpp"

namespace klab {

/// RFC 4180 style: cells containing a comma, quote or newline are quoted.
void write_csv(std::ostream& os, const Table& table);
/// Array of objects keyed by column name; cells stay strings.
void write_table_json(std::ostream& os, const Table& table);
/// trial row index and wall time in milliseconds, kept apart from the
/// trial table so the latter is reproducible byte for byte.
void write_timings_csv(std::ostream& os, const ExperimentResult& result);
void write_summary_json(std::ostream& os, const ExperimentResult& result);
/// Human summary with every configuration value in the header.
void write_report_md(std::ostream& os, const ExperimentResult& result);

/// Writes all four files into `dir`, creating it if needed. Returns the
/// path of the trial table.
std::filesystem::path write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace klab
