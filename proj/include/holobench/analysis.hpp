#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "holobench/modes.hpp"
#include "holobench/synth.hpp"

namespace holobench {

/// Rows: (mode, out-pol), X block then Y block. Columns: (port, in-pol), port-major, X before Y.
template <typename Scalar = double>
struct TransferMatrix {
  ComplexMatrix<Scalar> entries;
  int modes = 0;
  int ports = 0;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;

  Index row(int mode, Pol out_pol) const { return Index(static_cast<int>(out_pol) * modes + mode); }
  Index col(int port, Pol in_pol) const { return Index(2 * port + static_cast<int>(in_pol)); }
};

template <typename Scalar = double>
struct InputMeasurement {
  int port = 0;
  Pol in_pol = Pol::X;
  CoefficientVector<Scalar> x;  // decomposition of the X output field
  CoefficientVector<Scalar> y;
};

inline std::vector<std::string> transfer_row_labels(const std::vector<std::string>& mode_labels) {
  std::vector<std::string> out;
  for (char p : {'X', 'Y'})
    for (const auto& l : mode_labels) out.push_back(l + "/" + p);
  return out;
}

inline std::vector<std::string> transfer_col_labels(int ports) {
  std::vector<std::string> out;
  for (int p = 0; p < ports; ++p)
    for (char q : {'X', 'Y'}) out.push_back("p" + std::to_string(p) + "/" + q);
  return out;
}

/// Places one column per (port, in-pol). The port count is the largest port seen plus one
/// unless given explicitly.
template <typename Scalar>
TransferMatrix<Scalar> assemble_matrix(const std::vector<InputMeasurement<Scalar>>& measurements,
                                       const std::vector<std::string>& mode_labels,
                                       std::optional<int> port_count = std::nullopt) {
  const int modes = static_cast<int>(mode_labels.size());
  int ports = port_count.value_or(0);
  if (!port_count)
    for (const auto& m : measurements) ports = std::max(ports, m.port + 1);
  if (ports <= 0) throw Error(Errc::MissingInput, "no measurements");

  TransferMatrix<Scalar> t;
  t.modes = modes;
  t.ports = ports;
  t.entries = ComplexMatrix<Scalar>::Zero(2 * modes, 2 * ports);
  t.row_labels = transfer_row_labels(mode_labels);
  t.col_labels = transfer_col_labels(ports);
  std::vector<bool> seen(std::size_t(2 * ports), false);
  for (const auto& m : measurements) {
    if (m.port < 0 || m.port >= ports)
      throw Error(Errc::IndexOutOfRange, "measurement for port " + std::to_string(m.port) + " outside the device");
    if (m.x.size() != modes || m.y.size() != modes)
      throw Error(Errc::InvalidArgument, "coefficient vectors must have one entry per mode");
    const Index c = t.col(m.port, m.in_pol);
    if (seen[std::size_t(c)])
      throw Error(Errc::DuplicateInput, "two measurements for port " + std::to_string(m.port) + " pol " +
                                            std::string(1, pol_name(m.in_pol)));
    seen[std::size_t(c)] = true;
    t.entries.col(c).head(modes) = m.x;
    t.entries.col(c).tail(modes) = m.y;
  }
  for (int p = 0; p < ports; ++p)
    for (Pol q : {Pol::X, Pol::Y})
      if (!seen[std::size_t(t.col(p, q))])
        throw Error(Errc::MissingInput, "no measurement for port " + std::to_string(p) + " pol " +
                                            std::string(1, pol_name(q)));
  return t;
}

inline constexpr const char* kCondensationConvention =
    "P[port][mode] = 1/2 * sum over input pol * sum over output pol |T|^2 "
    "(averaged over input polarizations, summed over output polarizations)";

template <typename Scalar = double>
struct PowerMatrix {
  RealMatrix<Scalar> entries;  // ports x modes, linear power
  std::string convention = kCondensationConvention;
};

template <typename Scalar>
PowerMatrix<Scalar> power_condense(const TransferMatrix<Scalar>& t) {
  PowerMatrix<Scalar> p;
  p.entries = RealMatrix<Scalar>::Zero(t.ports, t.modes);
  const RealMatrix<Scalar> mag2 = t.entries.cwiseAbs2();
  for (int port = 0; port < t.ports; ++port)
    for (int mode = 0; mode < t.modes; ++mode) {
      Scalar acc = 0;
      for (Pol in : {Pol::X, Pol::Y})
        for (Pol out : {Pol::X, Pol::Y}) acc += mag2(t.row(mode, out), t.col(port, in));
      p.entries(port, mode) = acc / 2;
    }
  return p;
}

template <typename Scalar = double>
struct CrosstalkReport {
  Scalar xt_db = 0;            // 10 log10 of the mean linear ratio over ports (headline)
  Scalar worst_port_db = 0;    // largest per-port value
  std::vector<Scalar> per_port_db;
  std::vector<Scalar> per_port_linear;
  std::vector<int> target_group;
  std::vector<bool> zero_target;  // port had no power in its target group (xt = +inf)
};

namespace detail {

template <typename Scalar>
Scalar to_db(Scalar linear) {
  if (linear == 0) return -std::numeric_limits<Scalar>::infinity();
  return 10 * std::log10(linear);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> group_powers(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& row,
                                                      const ModeGroupMap& groups) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(groups.group_count());
  for (int m = 0; m < groups.mode_count(); ++m) g(groups.group_of(m)) += row(m);
  return g;
}

/// Argmax group, lowest index on ties.
template <typename Scalar>
int dominant_group(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& g) {
  int best = 0;
  for (int k = 1; k < g.size(); ++k)
    if (g(k) > g(best)) best = k;
  return best;
}

}  // namespace detail

/// Mode-group crosstalk per port: off-target over on-target group power. The target group of
/// each port is the dominant one unless `port_to_group` fixes it.
template <typename Scalar>
CrosstalkReport<Scalar> crosstalk_db(const PowerMatrix<Scalar>& p, const ModeGroupMap& groups,
                                     const std::optional<std::vector<int>>& port_to_group = std::nullopt) {
  const auto& e = p.entries;
  if (e.cols() != groups.mode_count()) throw Error(Errc::InvalidArgument, "group map does not match power matrix");
  if (port_to_group && Index(port_to_group->size()) != e.rows())
    throw Error(Errc::InvalidArgument, "port-to-group override needs one entry per port");
  CrosstalkReport<Scalar> r;
  Scalar sum = 0;
  bool any_inf = false;
  for (Index port = 0; port < e.rows(); ++port) {
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row = e.row(port).transpose();
    const auto g = detail::group_powers<Scalar>(row, groups);
    const int target = port_to_group ? (*port_to_group)[std::size_t(port)] : detail::dominant_group<Scalar>(g);
    if (target < 0 || target >= groups.group_count()) throw Error(Errc::IndexOutOfRange, "target group out of range");
    const Scalar on = g(target), off = g.sum() - on;
    r.target_group.push_back(target);
    r.zero_target.push_back(!(on > 0));
    if (!(on > 0)) {
      any_inf = true;
      r.per_port_linear.push_back(std::numeric_limits<Scalar>::infinity());
      r.per_port_db.push_back(std::numeric_limits<Scalar>::infinity());
      continue;
    }
    const Scalar ratio = off / on;
    r.per_port_linear.push_back(ratio);
    r.per_port_db.push_back(detail::to_db(ratio));
    sum += ratio;
  }
  r.xt_db = any_inf ? std::numeric_limits<Scalar>::infinity() : detail::to_db(sum / Scalar(e.rows()));
  r.worst_port_db = *std::max_element(r.per_port_db.begin(), r.per_port_db.end());
  return r;
}

/// Crosstalk averaged over every (port, in-pol) input instead of the condensed rows, using the
/// given per-port target groups.
template <typename Scalar>
Scalar crosstalk_per_input_db(const TransferMatrix<Scalar>& t, const ModeGroupMap& groups,
                              const std::vector<int>& target_group) {
  const RealMatrix<Scalar> mag2 = t.entries.cwiseAbs2();
  Scalar sum = 0;
  for (int port = 0; port < t.ports; ++port)
    for (Pol in : {Pol::X, Pol::Y}) {
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row(t.modes);
      for (int m = 0; m < t.modes; ++m) row(m) = mag2(t.row(m, Pol::X), t.col(port, in)) + mag2(t.row(m, Pol::Y), t.col(port, in));
      const auto g = detail::group_powers<Scalar>(row, groups);
      const Scalar on = g(target_group[std::size_t(port)]);
      if (!(on > 0)) return std::numeric_limits<Scalar>::infinity();
      sum += (g.sum() - on) / on;
    }
  return detail::to_db(sum / Scalar(2 * t.ports));
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> singular_values(const ComplexMatrix<Scalar>& m) {
  return Eigen::JacobiSVD<ComplexMatrix<Scalar>>(m).singularValues();
}

/// 10 log10(sigma_max^2 / sigma_min^2) of the full complex matrix; +inf when rank deficient.
template <typename Scalar>
Scalar mdl_db(const ComplexMatrix<Scalar>& m) {
  const auto s = singular_values(m);
  const Scalar smax = s.maxCoeff(), smin = s.minCoeff();
  if (!(smax > 0)) throw Error(Errc::InvalidArgument, "MDL of a zero matrix is undefined");
  if (!(smin > smax * std::numeric_limits<Scalar>::epsilon())) return std::numeric_limits<Scalar>::infinity();
  return 20 * std::log10(smax / smin);
}

template <typename Scalar>
Scalar mdl_db(const TransferMatrix<Scalar>& t) {
  return mdl_db(t.entries);
}

template <typename Scalar = double>
struct MetricsReport {
  Scalar xt_db = 0;
  Scalar mdl_db = 0;
  CrosstalkReport<Scalar> crosstalk;
  Scalar xt_per_input_db = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> singular_values;
  PowerMatrix<Scalar> power;
  ModeGroupMap groups = ModeGroupMap::lp_default();
  std::vector<std::string> mode_labels;
  bool mdl_rank_deficient = false;
};

template <typename Scalar>
MetricsReport<Scalar> analyze(const TransferMatrix<Scalar>& t, const ModeGroupMap& groups,
                              const std::vector<std::string>& mode_labels,
                              const std::optional<std::vector<int>>& port_to_group = std::nullopt) {
  MetricsReport<Scalar> r;
  r.power = power_condense(t);
  r.crosstalk = crosstalk_db(r.power, groups, port_to_group);
  r.xt_db = r.crosstalk.xt_db;
  r.xt_per_input_db = crosstalk_per_input_db(t, groups, r.crosstalk.target_group);
  r.singular_values = singular_values(t.entries);
  r.mdl_db = mdl_db(t.entries);
  r.mdl_rank_deficient = std::isinf(r.mdl_db);
  r.groups = groups;
  r.mode_labels = mode_labels;
  return r;
}

using TransferMatrixd = TransferMatrix<double>;
using PowerMatrixd = PowerMatrix<double>;
using MetricsReportd = MetricsReport<double>;

}  // namespace holobench
