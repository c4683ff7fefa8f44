#pragma once

// Report emission: CSV table, JSON document, two-column plot data and a
// gnuplot stub. Files are written to a temporary name and renamed.

#include <filesystem>
#include <string>

#include "weyl/assembly.hpp"
#include "weyl/harness.hpp"

namespace weyl {

inline constexpr int kReportSchemaVersion = 1;

// hbar,n_count,scaled_count,volume,remainder,counting_method,truncation_ratio,
// relative_forward,relative_reverse,ims_suite,rank_lemma
std::string csv_header();
std::string to_csv(const SweepReport& report);
std::string to_json(const SweepReport& report);
// "hbar remainder" per row, for plotting.
std::string to_dat(const SweepReport& report);
std::string gnuplot_script(const SweepReport& report);

void write_atomic(const std::filesystem::path& path, const std::string& contents);

// Writes <name>.csv, <name>.json, <name>.dat and <name>.gp under `dir`.
void write_report_files(const SweepReport& report, const std::filesystem::path& dir);

// Coordinate text dump of `op` to `path`.
void write_matrix_file(const DiscreteOperator& op, const std::filesystem::path& path);

}  // namespace weyl
