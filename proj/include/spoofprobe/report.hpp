#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spoofprobe/metrics.hpp"

namespace spoofprobe {

// A trained model referenced by result rows.
struct ModelRecord {
  std::string name;
  std::string checkpoint;  // path relative to the report
  std::string sha256;
  std::string telemetry;   // path relative to the report, may be empty
  bool operator==(const ModelRecord&) const = default;
};

// One evaluated configuration. intervention is empty for O, which does not
// depend on the intervention kind.
struct ResultRow {
  std::string intervention;
  std::string configuration;
  double eer = 0.0;
  std::string model;
  bool operator==(const ResultRow&) const = default;
};

struct RatioReport {
  std::string intervention;
  double eer_o = 0.0;
  double eer_te_b = 0.0;
  double eer_te_s = 0.0;
  // Empty when undefined (eer_o == 0); may be +inf.
  std::optional<double> ratio;
  bool operator==(const RatioReport&) const = default;
};

struct ExperimentReport {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<ModelRecord> models;
  std::vector<ResultRow> rows;
  std::vector<RatioReport> ratios;

  const ResultRow* find(std::string_view intervention, std::string_view configuration) const;
  const ModelRecord* model(std::string_view name) const;
  bool operator==(const ExperimentReport&) const = default;
};

// Adds a ratio for every intervention that has both Te_B and Te_S rows.
// Throws std::invalid_argument if such an intervention exists without an O
// row.
ExperimentReport assemble_report(std::vector<ResultRow> rows, std::vector<ModelRecord> models,
                                 std::vector<std::pair<std::string, std::string>> metadata = {});

std::string to_json(const ExperimentReport& report);
ExperimentReport report_from_json(std::string_view text);

// Columns System, O, Te_S, Te_B, Ratio (percent, two decimals).
std::string to_csv(const ExperimentReport& report);
// Columns System, O, Tr_B, Tr_S for train-side configurations.
std::string to_train_csv(const ExperimentReport& report);

}  // namespace spoofprobe
