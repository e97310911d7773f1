#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "holobench/analysis.hpp"

namespace holobench::io {

struct ReportFile {
  std::string scheme;
  TransferMatrixd transfer;
  MetricsReportd metrics;
};

nlohmann::json report_to_json(const ReportFile& report);
ReportFile report_from_json(const nlohmann::json& j);

/// DB value with two decimals, or the sentinels "-inf" / "inf".
std::string format_db(double v);

std::string report_summary(const ReportFile& report);

struct SchemeMetrics {
  std::string scheme;
  double xt_db = 0;
  double mdl_db = 0;
};

struct Comparison {
  std::optional<SchemeMetrics> truth;
  SchemeMetrics spatial;
  SchemeMetrics angular;
};

nlohmann::json comparison_to_json(const Comparison& c);
std::string comparison_summary(const Comparison& c);

}  // namespace holobench::io
