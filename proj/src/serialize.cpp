#include "nytro/serialize.hpp"

#include <cstdio>
#include <fstream>

namespace nytro {

namespace {

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Index>(j.size()));
  Index at = 0;
  for (const auto& entry : j) v[at++] = entry.get<double>();
  return v;
}

}  // namespace

Json to_json(const KernelSpec& spec) {
  return Json{{"family", spec.family == KernelFamily::gaussian ? "gaussian" : "linear"},
              {"bandwidth", spec.bandwidth}};
}

KernelSpec kernel_spec_from_json(const Json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "gaussian") return KernelSpec::gaussian(j.at("bandwidth").get<double>());
  if (family == "linear") return KernelSpec::linear();
  throw InputError("kernel_spec_from_json: unknown family " + family);
}

Json to_json(const Regularizer& hyper) {
  if (const auto* ridge = std::get_if<RidgePenalty>(&hyper))
    return Json{{"lambda", ridge->lambda}};
  if (const auto* sched = std::get_if<IterationSchedule>(&hyper))
    return Json{{"gamma", sched->gamma}, {"steps", sched->steps}};
  return Json(nullptr);  // KOLS
}

Regularizer regularizer_from_json(const Json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.contains("lambda")) return RidgePenalty{j.at("lambda").get<double>()};
  return IterationSchedule{j.at("gamma").get<double>(), j.at("steps").get<int>()};
}

Json to_json(const CoefficientModel& model) {
  Json j;
  j["algorithm_tag"] = algorithm_name(model.algorithm_tag);
  j["hyper"] = to_json(model.hyper);
  j["expansion_idx"] = model.expansion_idx;
  j["alpha"] = vector_to_json(model.alpha);
  j["kernel_spec"] = model.kernel_spec ? to_json(*model.kernel_spec) : Json(nullptr);
  return j;
}

CoefficientModel model_from_json(const Json& j) {
  CoefficientModel model;
  model.algorithm_tag = algorithm_from_name(j.at("algorithm_tag").get<std::string>());
  model.hyper = regularizer_from_json(j.at("hyper"));
  model.expansion_idx = j.at("expansion_idx").get<std::vector<Index>>();
  model.alpha = vector_from_json(j.at("alpha"));
  if (!j.at("kernel_spec").is_null())
    model.kernel_spec = kernel_spec_from_json(j.at("kernel_spec"));
  return model;
}

Json to_json(const RiskReport& report) {
  Json q = Json::array();
  for (Index i = 0; i < report.q_matrix.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < report.q_matrix.cols(); ++j) row.push_back(report.q_matrix(i, j));
    q.push_back(std::move(row));
  }
  return Json{{"variance", report.variance},
              {"bias", report.bias},
              {"excess_risk", report.excess_risk},
              {"q_matrix", std::move(q)}};
}

Json to_json(const SelectionReport& report) {
  Json curve = Json::array();
  for (const auto& point : report.validation_curve)
    curve.push_back(Json{{"hyper", point.hyper}, {"rmse", point.rmse}});
  return Json{{"algorithm", algorithm_name(report.algorithm_tag)},
              {"chosen_hyper", report.chosen_hyper},
              {"validation_curve", std::move(curve)},
              {"wall_time_s", report.wall_time_s}};
}

Json to_json(const RegimeProfile& profile) {
  return Json{{"n", profile.n},
              {"d_star", profile.d_star},
              {"d_eff", profile.d_eff},
              {"d_tilde", profile.d_tilde},
              {"snr", profile.snr},
              {"lambda_star", profile.lambda_star},
              {"c1", profile.c1},
              {"c2", profile.c2},
              {"region", regime_name(profile.region)}};
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("write_csv: cannot open " + path);
  out << kCsvBanner << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    out << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("write_text_file: cannot open " + path);
  out << content;
}

}  // namespace nytro
