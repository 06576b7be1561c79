#pragma once
// JSON adapters for the public value types and a small CSV writer. Every CSV
// starts with the schema banner `# nytro-lab v1`.

#include "nytro/complexity.hpp"
#include "nytro/estimators.hpp"
#include "nytro/risk_oracle.hpp"
#include "nytro/selection.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace nytro {

using Json = nlohmann::json;

Json to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const Json& j);

Json to_json(const Regularizer& hyper);
Regularizer regularizer_from_json(const Json& j);

Json to_json(const CoefficientModel& model);
CoefficientModel model_from_json(const Json& j);

Json to_json(const RiskReport& report);
Json to_json(const SelectionReport& report);
Json to_json(const RegimeProfile& profile);

constexpr const char* kCsvBanner = "# nytro-lab v1";

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);

std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace nytro
