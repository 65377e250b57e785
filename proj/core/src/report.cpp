#include "polyfield/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace polyfield {

nlohmann::json report_to_json(const ExperimentReport& rep) {
  nlohmann::json j;
  j["name"] = rep.name;
  j["parameters"] = rep.parameters;
  j["columns"] = rep.columns;
  j["rows"] = rep.rows;
  j["trend"] = rep.trend;
  j["verdict"] = rep.verdict;
  j["notes"] = rep.notes;
  return j;
}

std::string report_to_csv(const ExperimentReport& rep) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < rep.columns.size(); ++i) {
    if (i) out << ',';
    out << rep.columns[i];
  }
  out << '\n';
  for (const auto& row : rep.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace polyfield
