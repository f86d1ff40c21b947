#include "gwlab/report.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gwlab {

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void ReportDoc::config(const std::string& key, const std::string& value) {
  config_.emplace_back(key, value);
}
void ReportDoc::config(const std::string& key, double value) {
  config_.emplace_back(key, format_double(value));
}
void ReportDoc::config(const std::string& key, std::int64_t value) {
  config_.emplace_back(key, std::to_string(value));
}
void ReportDoc::config(const std::string& key, std::uint64_t value) {
  config_.emplace_back(key, std::to_string(value));
}
void ReportDoc::add(ReportRow row) { rows_.push_back(std::move(row)); }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

std::string ReportDoc::csv() const {
  std::string out = "name,value,stderr,bound,margin_sigma,verdict\n";
  out += "schema_version," + std::to_string(schema_version) + ",,,,\n";
  out += "command," + command_ + ",,,,\n";
  for (const auto& [k, v] : config_) out += "config." + k + "," + csv_field(v) + ",,,,\n";
  for (const ReportRow& r : rows_) {
    out += (r.section.empty() ? r.name : r.section + "." + r.name) + ",";
    out += format_double(r.value) + ",";
    out += format_double(r.se) + ",";
    out += format_double(r.bound) + ",";
    out += format_double(r.margin_sigma) + ",";
    out += r.verdict + "\n";
  }
  return out;
}

std::string ReportDoc::json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = schema_version;
  j["command"] = command_;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json sections = nlohmann::ordered_json::object();
  for (const ReportRow& r : rows_) {
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    if (!std::isnan(r.value)) row["value"] = r.value;
    if (!std::isnan(r.se)) row["stderr"] = r.se;
    if (!std::isnan(r.bound)) row["bound"] = r.bound;
    if (!std::isnan(r.margin_sigma)) row["margin_sigma"] = r.margin_sigma;
    if (!r.verdict.empty()) row["verdict"] = r.verdict;
    sections[r.section.empty() ? "results" : r.section][r.name] = row;
  }
  j["results"] = sections;
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << body;
}

}  // namespace gwlab
