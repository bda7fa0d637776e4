#pragma once

#include "gameopt/integrators.hpp"
#include "gameopt/types.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gameopt {

/// One CSV cell: blank, text, number, or integer count.
using CsvCell = std::variant<std::monostate, std::string, double, long>;

/// Deterministic CSV writer: '#'-prefixed schema comment, then a header row,
/// then data rows. Numbers are formatted by format_double; '.' decimal
/// separator always (no locale involvement). Refuses to overwrite an
/// existing file unless told to.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& schema,
            const std::vector<std::string>& header, bool overwrite);
  void write_row(const std::vector<CsvCell>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t n_columns_;
};

/// Opens an output file with the shared no-clobber rule: throws ConfigError
/// naming the path when it already exists and overwrite is false.
std::ofstream open_output_file(const std::filesystem::path& path, bool overwrite);

/// Schema tags written into the '#' comment line of each CSV kind.
inline constexpr const char* kTrajectorySchema = "gameopt.trajectory.v1";
inline constexpr const char* kSweepSchema = "gameopt.sweep.v1";
inline constexpr const char* kDalSummarySchema = "gameopt.dal_summary.v1";

/// Trajectory CSV: iter, grad_norm, J1..Jn [, metric columns]. The metric
/// names become header columns after the costs.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          int n_players, const std::vector<std::string>& metric_names,
                          bool overwrite);

/// Minimal CSV reader for tests and summaries: returns header + rows, and
/// checks the '#' schema line against expected_schema when given.
struct CsvContent {
  std::string schema;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvContent read_csv(const std::filesystem::path& path,
                    const std::optional<std::string>& expected_schema = std::nullopt);

}  // namespace gameopt
