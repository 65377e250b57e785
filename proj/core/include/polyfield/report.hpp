#pragma once

#include <string>

#include <json.hpp>

#include "polyfield/harness.hpp"

namespace polyfield {

nlohmann::json report_to_json(const ExperimentReport& rep);
std::string report_to_csv(const ExperimentReport& rep);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace polyfield
