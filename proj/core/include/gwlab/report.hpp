#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gwlab {

// Shortest round-trip decimal form; keeps report bodies byte-stable.
std::string format_double(double v);

struct ReportRow {
  std::string section;
  std::string name;
  double value = NAN;
  double se = NAN;
  double bound = NAN;
  double margin_sigma = NAN;
  std::string verdict;
};

// One report in two serializations: flat CSV (one row per statistic) and JSON
// nested by section. Both embed the full config and seeds and carry a schema
// version; neither contains wall-clock data, so identical configs produce
// byte-identical bodies.
class ReportDoc {
 public:
  explicit ReportDoc(std::string command) : command_(std::move(command)) {}

  void config(const std::string& key, const std::string& value);
  void config(const std::string& key, double value);
  void config(const std::string& key, std::int64_t value);
  void config(const std::string& key, std::uint64_t value);
  void add(ReportRow row);

  std::string csv() const;
  std::string json() const;
  const std::vector<ReportRow>& rows() const { return rows_; }
  const std::string& command() const { return command_; }

  static constexpr int schema_version = 1;

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> config_;
  std::vector<ReportRow> rows_;
};

void write_text_file(const std::string& path, const std::string& body);

}  // namespace gwlab
