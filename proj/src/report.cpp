#include "holobench/report.hpp"

#include <cstdio>
#include <sstream>

#include "holobench/formats.hpp"

namespace holobench::io {

namespace {

constexpr const char* kXtAggregation =
    "per port: 10 log10(off-target group power / target group power); headline: 10 log10 of the mean of the "
    "linear per-port ratios; also reported: worst port, and the mean over every (port, input polarization)";
constexpr const char* kTargetRule = "dominant mode group per port, ties to the lowest group index";
constexpr const char* kMdlRule = "10 log10(sigma_max^2 / sigma_min^2) over the full complex transfer matrix";

json real_matrix_json(const RealMatrix<double>& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

RealMatrix<double> real_matrix_from(const json& j) {
  const Index rows = Index(j.size());
  const Index cols = rows ? Index(j[0].size()) : 0;
  RealMatrix<double> m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (Index(j[std::size_t(r)].size()) != cols) throw Error(Errc::Format, "ragged matrix in report");
    for (Index c = 0; c < cols; ++c) m(r, c) = j[std::size_t(r)][std::size_t(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string format_db(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return std::string(buf) == "-0.00" ? "0.00" : buf;
}

json report_to_json(const ReportFile& report) {
  const auto& m = report.metrics;
  json per_port = json::array();
  for (std::size_t p = 0; p < m.crosstalk.per_port_db.size(); ++p)
    per_port.push_back({{"port", p},
                        {"target_group", m.crosstalk.target_group[p]},
                        {"xt_db", number_or_inf(m.crosstalk.per_port_db[p])},
                        {"zero_target", bool(m.crosstalk.zero_target[p])}});
  json groups = json::object();
  for (std::size_t k = 0; k < m.mode_labels.size(); ++k) groups[m.mode_labels[k]] = m.groups.group_of(int(k));
  json sv = json::array();
  for (Index k = 0; k < m.singular_values.size(); ++k) sv.push_back(m.singular_values(k));

  return {
      {"format", "holobench-report"},
      {"version", 1},
      {"scheme", report.scheme},
      {"xt_db", number_or_inf(m.xt_db)},
      {"mdl_db", number_or_inf(m.mdl_db)},
      {"mdl_rank_deficient", m.mdl_rank_deficient},
      {"xt_worst_port_db", number_or_inf(m.crosstalk.worst_port_db)},
      {"xt_per_input_db", number_or_inf(m.xt_per_input_db)},
      {"per_port", per_port},
      {"singular_values", sv},
      {"mode_labels", m.mode_labels},
      {"group_assignment", m.groups.assignment()},
      {"power_matrix", real_matrix_json(m.power.entries)},
      {"transfer_matrix", matrix_to_json(report.transfer.entries)},
      {"transfer_row_labels", report.transfer.row_labels},
      {"transfer_col_labels", report.transfer.col_labels},
      {"conventions",
       {{"condensation", m.power.convention},
        {"xt_aggregation", kXtAggregation},
        {"target_group", kTargetRule},
        {"mdl", kMdlRule},
        {"group_map", groups}}},
  };
}

ReportFile report_from_json(const json& j) {
  try {
    if (j.at("format") != "holobench-report") throw Error(Errc::Format, "not a holobench report");
    ReportFile r;
    r.scheme = j.at("scheme").get<std::string>();
    auto& m = r.metrics;
    m.xt_db = number_from_json(j.at("xt_db"));
    m.mdl_db = number_from_json(j.at("mdl_db"));
    m.mdl_rank_deficient = j.at("mdl_rank_deficient").get<bool>();
    m.crosstalk.xt_db = m.xt_db;
    m.crosstalk.worst_port_db = number_from_json(j.at("xt_worst_port_db"));
    m.xt_per_input_db = number_from_json(j.at("xt_per_input_db"));
    for (const auto& p : j.at("per_port")) {
      const double db = number_from_json(p.at("xt_db"));
      m.crosstalk.per_port_db.push_back(db);
      m.crosstalk.per_port_linear.push_back(std::isinf(db) && db > 0 ? db : std::pow(10.0, db / 10));
      m.crosstalk.target_group.push_back(p.at("target_group").get<int>());
      m.crosstalk.zero_target.push_back(p.at("zero_target").get<bool>());
    }
    const auto& sv = j.at("singular_values");
    m.singular_values.resize(Index(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) m.singular_values(Index(k)) = sv[k].get<double>();
    m.mode_labels = j.at("mode_labels").get<std::vector<std::string>>();
    m.groups = ModeGroupMap(j.at("group_assignment").get<std::vector<int>>());
    m.power.entries = real_matrix_from(j.at("power_matrix"));
    m.power.convention = j.at("conventions").at("condensation").get<std::string>();
    r.transfer.entries = matrix_from_json(j.at("transfer_matrix"));
    r.transfer.row_labels = j.at("transfer_row_labels").get<std::vector<std::string>>();
    r.transfer.col_labels = j.at("transfer_col_labels").get<std::vector<std::string>>();
    r.transfer.modes = int(r.transfer.entries.rows() / 2);
    r.transfer.ports = int(r.transfer.entries.cols() / 2);
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::Format, std::string("malformed report: ") + e.what());
  }
}

std::string report_summary(const ReportFile& report) {
  const auto& m = report.metrics;
  std::ostringstream out;
  out << "holobench analysis (" << report.scheme << " multiplexing)\n\n";
  out << "  Mode-group crosstalk  XT  = " << format_db(m.xt_db) << " dB\n";
  out << "  Mode-dependent loss   MDL = " << format_db(m.mdl_db) << " dB\n";
  out << "  XT worst port             = " << format_db(m.crosstalk.worst_port_db) << " dB\n";
  out << "  XT over (port, pol) inputs = " << format_db(m.xt_per_input_db) << " dB\n\n";
  out << "  Per-port crosstalk:\n";
  for (std::size_t p = 0; p < m.crosstalk.per_port_db.size(); ++p)
    out << "    port " << p << "  target group " << m.crosstalk.target_group[p] << "  XT "
        << format_db(m.crosstalk.per_port_db[p]) << " dB\n";
  out << "\n  Power transfer matrix (rows: input port, columns:";
  for (const auto& l : m.mode_labels) out << " " << l;
  out << ")\n";
  for (Index r = 0; r < m.power.entries.rows(); ++r) {
    out << "   ";
    for (Index c = 0; c < m.power.entries.cols(); ++c) {
      char buf[32];
      std::snprintf(buf, sizeof buf, " %9.5f", m.power.entries(r, c));
      out << buf;
    }
    out << "\n";
  }
  out << "\n  Singular values:";
  for (Index k = 0; k < m.singular_values.size(); ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %.6f", m.singular_values(k));
    out << buf;
  }
  out << "\n\n  Conventions:\n    condensation: " << m.power.convention << "\n    crosstalk: " << kXtAggregation
      << "\n    target group: " << kTargetRule << "\n    MDL: " << kMdlRule << "\n    groups:";
  for (std::size_t k = 0; k < m.mode_labels.size(); ++k)
    out << " " << m.mode_labels[k] << "->" << m.groups.group_of(int(k));
  out << "\n";
  return out.str();
}

json comparison_to_json(const Comparison& c) {
  auto entry = [](const SchemeMetrics& s) {
    return json{{"xt_db", number_or_inf(s.xt_db)}, {"mdl_db", number_or_inf(s.mdl_db)}};
  };
  json j = {{"format", "holobench-comparison"},
            {"version", 1},
            {"spatial", entry(c.spatial)},
            {"angular", entry(c.angular)},
            {"difference", {{"xt_db", number_or_inf(c.spatial.xt_db - c.angular.xt_db)},
                            {"mdl_db", number_or_inf(c.spatial.mdl_db - c.angular.mdl_db)}}},
            {"reference_measurement",
             {{"note", "published photonic-lantern measurement with the same two schemes; raw frames unavailable"},
              {"spatial", {{"xt_db", -13.8}, {"mdl_db", 1.50}}},
              {"angular", {{"xt_db", -14.0}, {"mdl_db", 1.45}}}}}};
  if (c.truth) j["ground_truth"] = entry(*c.truth);
  return j;
}

std::string comparison_summary(const Comparison& c) {
  std::ostringstream out;
  out << "Spatial vs angular multiplexing\n\n";
  out << "                 XT [dB]    MDL [dB]\n";
  auto line = [&](const char* name, double xt, double mdl) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %-12s %9s  %9s\n", name, format_db(xt).c_str(), format_db(mdl).c_str());
    out << buf;
  };
  if (c.truth) line("truth", c.truth->xt_db, c.truth->mdl_db);
  line("spatial", c.spatial.xt_db, c.spatial.mdl_db);
  line("angular", c.angular.xt_db, c.angular.mdl_db);
  line("difference", c.spatial.xt_db - c.angular.xt_db, c.spatial.mdl_db - c.angular.mdl_db);
  out << "\n  * Reference measurement of a photonic lantern with the same two schemes: XT -13.8 dB (spatial) / "
         "-14.0 dB (angular), MDL 1.50 dB / 1.45 dB. Those raw frames are not available, so this run compares "
         "both schemes against a known synthetic device instead.\n";
  return out.str();
}

}  // namespace holobench::io
