// Config-driven experiment runner behind the CLI: JSON config in, results.csv
// and manifest.json out, plus the audit battery and a CSV summary table.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cleanlabel/eval.hpp"

namespace cleanlabel {

// SHA-256 of a byte string as lowercase hex; used to fingerprint configs in
// the run manifest.
std::string sha256_hex(std::string_view data);

struct ResultRow {
  std::string experiment_id;
  std::string class_name;
  std::string learner;
  std::string attacker;
  std::optional<std::size_t> n;
  std::optional<std::size_t> d;
  std::optional<std::size_t> t;
  std::optional<double> gamma;
  std::optional<double> epsilon;
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t test_points = 0;
  double atk_mean = 0.0;
  double atk_ci95 = 0.0;  // half-width
  double err_mean = 0.0;
  std::size_t audit_violations = 0;
  std::uint64_t seed = 0;
};

std::string results_csv_header();
// One CSV line, fields quoted where needed, floats printed with %.17g so
// equal-seed runs are byte-identical.
std::string results_csv_line(const ResultRow& row);

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  std::size_t workers = 1;
};

// Runs one config end to end. Returns 0 on success, 2 on a config problem,
// 3 when any audit violation or trial failure surfaced.
int run_config(const RunOptions& options, std::ostream& log);

// Audit battery. scope is one of: all, attackers, geometry, symmetry.
// Returns 0 when everything holds, 2 for an unknown scope, 3 otherwise.
int run_audits(const std::string& scope, std::ostream& log);

// Aggregates results.csv files: rows are grouped by the named columns and
// atk/err means are averaged within each group. Returns 0, or 2 when a file
// or column is unusable.
int make_table(const std::vector<std::string>& files,
               const std::vector<std::string>& group_by, std::ostream& out);

}  // namespace cleanlabel
