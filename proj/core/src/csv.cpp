#include "gameopt/csv.hpp"

#include <utility>

#include "gameopt/report.hpp"

namespace gameopt {

namespace {

std::string cell_to_string(const CsvCell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return "";
  if (const auto* s = std::get_if<std::string>(&cell)) {
    if (s->find_first_of(",\n\r\"") != std::string::npos) {
      throw std::invalid_argument("CsvWriter: text cells must not contain separators");
    }
    return *s;
  }
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return std::to_string(std::get<long>(cell));
}

}  // namespace

std::ofstream open_output_file(const std::filesystem::path& path, bool overwrite) {
  if (!overwrite && std::filesystem::exists(path)) {
    throw ConfigError("output file already exists (pass --overwrite to replace): " +
                      path.string());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ConfigError("cannot open output file for writing: " + path.string());
  }
  return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& schema,
                     const std::vector<std::string>& header, bool overwrite)
    : path_(path), out_(open_output_file(path, overwrite)), n_columns_(header.size()) {
  if (header.empty()) {
    throw std::invalid_argument("CsvWriter: header must be nonempty");
  }
  out_ << "# schema: " << schema << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out_ << ",";
    out_ << header[i];
  }
  out_ << "\n";
}

void CsvWriter::write_row(const std::vector<CsvCell>& cells) {
  if (cells.size() != n_columns_) {
    throw std::invalid_argument("CsvWriter: row width does not match header");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out_ << ",";
    out_ << cell_to_string(cells[i]);
  }
  out_ << "\n";
  if (!out_) {
    throw ConfigError("write failed on " + path_.string());
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          int n_players, const std::vector<std::string>& metric_names,
                          bool overwrite) {
  std::vector<std::string> header = {"iter", "grad_norm"};
  for (int i = 1; i <= n_players; ++i) {
    header.push_back("J" + std::to_string(i));
  }
  header.insert(header.end(), metric_names.begin(), metric_names.end());
  CsvWriter writer(path, kTrajectorySchema, header, overwrite);
  for (const TrajectoryRecord& rec : trajectory.records) {
    std::vector<CsvCell> row;
    row.reserve(header.size());
    row.emplace_back(rec.iter);
    row.emplace_back(rec.grad_norm);
    if (rec.costs.size() != static_cast<std::size_t>(n_players) ||
        rec.task_metrics.size() != metric_names.size()) {
      throw std::invalid_argument("write_trajectory_csv: record width mismatch");
    }
    for (double c : rec.costs) row.emplace_back(c);
    for (double m : rec.task_metrics) row.emplace_back(m);
    writer.write_row(row);
  }
}

CsvContent read_csv(const std::filesystem::path& path,
                    const std::optional<std::string>& expected_schema) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open CSV file: " + path.string());
  }
  CsvContent content;
  std::string line;
  bool have_header = false;
  const auto split = [](const std::string& text) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = text.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(text.substr(start));
        break;
      }
      fields.push_back(text.substr(start, comma - start));
      start = comma + 1;
    }
    return fields;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# schema: ";
      if (line.rfind(tag, 0) == 0) content.schema = line.substr(tag.size());
      continue;
    }
    if (!have_header) {
      content.header = split(line);
      have_header = true;
      continue;
    }
    content.rows.push_back(split(line));
  }
  if (expected_schema.has_value() && content.schema != *expected_schema) {
    throw ConfigError("CSV schema mismatch in " + path.string() + ": expected '" +
                      *expected_schema + "', found '" + content.schema + "'");
  }
  return content;
}

}  // namespace gameopt
