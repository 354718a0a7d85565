#include "spoofprobe/report.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace spoofprobe {

using ojson = nlohmann::ordered_json;

const ResultRow* ExperimentReport::find(std::string_view intervention, std::string_view configuration) const {
  for (const auto& r : rows) {
    if (r.configuration == configuration && (configuration == "O" || r.intervention == intervention)) return &r;
  }
  return nullptr;
}

const ModelRecord* ExperimentReport::model(std::string_view name) const {
  for (const auto& m : models) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

ExperimentReport assemble_report(std::vector<ResultRow> rows, std::vector<ModelRecord> models,
                                 std::vector<std::pair<std::string, std::string>> metadata) {
  ExperimentReport report;
  report.rows = std::move(rows);
  report.models = std::move(models);
  report.metadata = std::move(metadata);

  std::vector<std::string> kinds;
  for (const auto& r : report.rows) {
    if (r.configuration == "Te_B" &&
        std::find(kinds.begin(), kinds.end(), r.intervention) == kinds.end()) {
      kinds.push_back(r.intervention);
    }
  }
  for (const auto& kind : kinds) {
    const ResultRow* te_b = report.find(kind, "Te_B");
    const ResultRow* te_s = report.find(kind, "Te_S");
    if (!te_s) continue;
    const ResultRow* o = report.find(kind, "O");
    if (!o) throw std::invalid_argument("impact ratio for '" + kind + "' requires an O result");
    RatioReport rr{kind, o->eer, te_b->eer, te_s->eer, std::nullopt};
    if (o->eer != 0.0) rr.ratio = intervention_ratio(o->eer, te_b->eer, te_s->eer);
    report.ratios.push_back(rr);
  }
  return report;
}

namespace {

ojson ratio_json(const std::optional<double>& r) {
  if (!r) return nullptr;
  if (std::isinf(*r)) return "inf";
  return *r;
}

std::optional<double> ratio_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfiniteRatio;
    throw std::runtime_error("invalid ratio value");
  }
  return j.get<double>();
}

std::string ratio_cell(const std::optional<double>& r) {
  if (!r) return "n/a";
  if (std::isinf(*r)) return "inf";
  return fmt::format("{:.2f}", *r);
}

}  // namespace

std::string to_json(const ExperimentReport& report) {
  ojson j;
  j["format"] = "spoofprobe-report";
  j["version"] = 1;
  ojson meta = ojson::object();
  for (const auto& [k, v] : report.metadata) meta[k] = v;
  j["metadata"] = meta;
  j["models"] = ojson::array();
  for (const auto& m : report.models) {
    j["models"].push_back({{"name", m.name}, {"checkpoint", m.checkpoint}, {"sha256", m.sha256},
                           {"telemetry", m.telemetry}});
  }
  j["results"] = ojson::array();
  for (const auto& r : report.rows) {
    j["results"].push_back({{"intervention", r.intervention},
                            {"configuration", r.configuration},
                            {"eer", r.eer},
                            {"eer_percent", format_percent(r.eer)},
                            {"model", r.model}});
  }
  j["ratios"] = ojson::array();
  for (const auto& r : report.ratios) {
    j["ratios"].push_back({{"intervention", r.intervention},
                           {"O", r.eer_o},
                           {"Te_B", r.eer_te_b},
                           {"Te_S", r.eer_te_s},
                           {"ratio", ratio_json(r.ratio)}});
  }
  return j.dump(2) + "\n";
}

ExperimentReport report_from_json(std::string_view text) {
  const auto j = nlohmann::ordered_json::parse(text);
  if (j.value("format", "") != "spoofprobe-report") throw std::runtime_error("not a spoofprobe report");
  ExperimentReport report;
  for (const auto& [k, v] : j.at("metadata").items()) report.metadata.emplace_back(k, v.get<std::string>());
  for (const auto& m : j.at("models")) {
    report.models.push_back({m.at("name").get<std::string>(), m.at("checkpoint").get<std::string>(),
                             m.at("sha256").get<std::string>(), m.at("telemetry").get<std::string>()});
  }
  for (const auto& r : j.at("results")) {
    report.rows.push_back({r.at("intervention").get<std::string>(), r.at("configuration").get<std::string>(),
                           r.at("eer").get<double>(), r.at("model").get<std::string>()});
  }
  for (const auto& r : j.at("ratios")) {
    report.ratios.push_back({r.at("intervention").get<std::string>(), r.at("O").get<double>(),
                             r.at("Te_B").get<double>(), r.at("Te_S").get<double>(), ratio_from_json(r.at("ratio"))});
  }
  return report;
}

std::string to_csv(const ExperimentReport& report) {
  std::string out = "System,O,Te_S,Te_B,Ratio\n";
  for (const auto& r : report.ratios) {
    out += fmt::format("{},{},{},{},{}\n", r.intervention, format_percent(r.eer_o), format_percent(r.eer_te_s),
                       format_percent(r.eer_te_b), ratio_cell(r.ratio));
  }
  return out;
}

std::string to_train_csv(const ExperimentReport& report) {
  std::string out = "System,O,Tr_B,Tr_S\n";
  std::vector<std::string> kinds;
  for (const auto& r : report.rows) {
    if ((r.configuration == "Tr_B" || r.configuration == "Tr_S") &&
        std::find(kinds.begin(), kinds.end(), r.intervention) == kinds.end()) {
      kinds.push_back(r.intervention);
    }
  }
  auto cell = [&](const std::string& kind, std::string_view cfg) {
    const ResultRow* row = report.find(kind, cfg);
    return row ? format_percent(row->eer) : std::string("n/a");
  };
  for (const auto& kind : kinds) {
    out += fmt::format("{},{},{},{}\n", kind, cell(kind, "O"), cell(kind, "Tr_B"), cell(kind, "Tr_S"));
  }
  return out;
}

}  // namespace spoofprobe
