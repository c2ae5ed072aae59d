#pragma once

#include <optional>
#include <string>

#include "youden_napg/pipeline.hpp"

namespace youden {

/// FitResult as JSON (schema/fit_result.schema.json). `test` metrics are
/// included when given.
std::string fit_result_json(const FitResult& result,
                            const std::optional<EvalMetrics>& test = std::nullopt,
                            int indent = 2);

}  // namespace youden
