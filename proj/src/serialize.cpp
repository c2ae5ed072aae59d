#include "youden_napg/serialize.hpp"

#include <cmath>
#include <vector>

#include "json.hpp"

namespace youden {

namespace {

using Json = nlohmann::ordered_json;

Json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

Json metrics_json(const EvalMetrics& m) {
  Json j;
  j["weighted_youden"] = m.weighted_youden;
  j["sensitivity"] = m.sensitivity;
  j["specificity"] = m.specificity;
  j["nonzero_count"] = m.nonzero_count;
  j["detection_rate"] = optional_number(m.detection_rate);
  j["shrinkage_accuracy"] = optional_number(m.shrinkage_accuracy);
  return j;
}

}  // namespace

std::string fit_result_json(const FitResult& result, const std::optional<EvalMetrics>& test,
                            int indent) {
  Json j;
  j["method"] = result.method;
  j["omega"] = std::vector<double>(result.rule.omega.data(),
                                   result.rule.omega.data() + result.rule.omega.size());
  j["cutoff"] = result.rule.cutoff;
  j["lambda"] = result.lambda_selected;
  j["pi"] = result.pi;
  j["h"] = optional_number(result.bandwidth);
  j["degenerate"] = result.degenerate;
  j["solver"] = to_string(result.trace.variant);
  j["termination"] = to_string(result.termination);
  j["iterations"] = result.iterations;
  j["final_residual"] = result.final_residual;
  j["invariant_violations"] = result.invariant_violations;
  j["metrics"] = metrics_json(result.train_metrics);
  if (test) j["test_metrics"] = metrics_json(*test);
  Json table = Json::array();
  for (const auto& row : result.cv_table) {
    table.push_back(Json{{"lambda", row.lambda}, {"mean_validation_youden", row.mean_validation_youden}});
  }
  j["cv_table"] = std::move(table);
  return j.dump(indent);
}

}  // namespace youden
