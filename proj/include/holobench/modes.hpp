#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "holobench/field.hpp"

namespace holobench {

inline constexpr int kMaxHermiteOrder = 20;

/// Physicists' Hermite polynomial H_n(x).
template <typename Scalar>
Scalar hermite_poly(int order, Scalar x) {
  if (order < 0) throw Error(Errc::InvalidArgument, "Hermite order must be non-negative");
  if (order > kMaxHermiteOrder)
    throw Error(Errc::OrderTooHigh, "Hermite order " + std::to_string(order) + " exceeds " +
                                        std::to_string(kMaxHermiteOrder));
  Scalar prev = 1;
  if (order == 0) return prev;
  Scalar cur = 2 * x;
  for (int k = 1; k < order; ++k) {
    Scalar next = 2 * x * cur - 2 * Scalar(k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

template <typename Scalar = double>
struct ModeSpec {
  int m = 0;
  int n = 0;
  Scalar waist = 0;  // w0, meters
  Scalar x0 = 0;
  Scalar y0 = 0;
};

/// Hermite-Gaussian HG_mn sampled on `grid` and normalized so that inner_product(mode, mode) = 1
/// on that grid.
template <typename Scalar>
ComplexField<Scalar> hg_mode(const Grid2D<Scalar>& grid, const ModeSpec<Scalar>& spec, Diagnostics* diag = nullptr) {
  if (!(spec.waist > 0)) throw Error(Errc::InvalidArgument, "mode waist must be positive");
  if (spec.m < 0 || spec.n < 0) throw Error(Errc::InvalidArgument, "mode orders must be non-negative");
  if (grid.extent_x() < 6 * spec.waist || grid.extent_y() < 6 * spec.waist)
    warn(diag, Warn::NormalizationUnreliable,
         "grid extent is below 6 waists; the mode is truncated by the grid boundary");

  const Scalar s = std::sqrt(Scalar(2)) / spec.waist;
  const Scalar inv_w2 = Scalar(1) / (spec.waist * spec.waist);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ux(grid.nx()), uy(grid.ny());
  for (Index ix = 0; ix < grid.nx(); ++ix) {
    const Scalar dx = grid.x(ix) - spec.x0;
    ux(ix) = hermite_poly(spec.m, s * dx) * std::exp(-dx * dx * inv_w2);
  }
  for (Index iy = 0; iy < grid.ny(); ++iy) {
    const Scalar dy = grid.y(iy) - spec.y0;
    uy(iy) = hermite_poly(spec.n, s * dy) * std::exp(-dy * dy * inv_w2);
  }
  RealMatrix<Scalar> v = uy * ux.transpose();
  const Scalar norm = std::sqrt(v.squaredNorm() * grid.pixel_area());
  if (!(norm > 0)) throw Error(Errc::InvalidArgument, "mode vanishes on the grid");
  return ComplexField<Scalar>::from_real(grid, v / norm);
}

/// Assignment of each mode to a mode group; groups are numbered contiguously from 0.
class ModeGroupMap {
 public:
  explicit ModeGroupMap(std::vector<int> group_of_mode) : group_of_(std::move(group_of_mode)) {
    if (group_of_.empty()) throw Error(Errc::InvalidArgument, "group map is empty");
    const int top = *std::max_element(group_of_.begin(), group_of_.end());
    for (int g = 0; g <= top; ++g)
      if (std::find(group_of_.begin(), group_of_.end(), g) == group_of_.end())
        throw Error(Errc::InvalidArgument, "mode groups must be contiguous from 0; group " + std::to_string(g) +
                                               " is empty");
    if (*std::min_element(group_of_.begin(), group_of_.end()) < 0)
      throw Error(Errc::InvalidArgument, "negative mode group");
  }

  /// {LP01} -> 0, {LP11a, LP11b} -> 1.
  static ModeGroupMap lp_default() { return ModeGroupMap({0, 1, 1}); }

  static ModeGroupMap each_mode_own_group(int modes) {
    std::vector<int> g(static_cast<std::size_t>(modes));
    for (int k = 0; k < modes; ++k) g[static_cast<std::size_t>(k)] = k;
    return ModeGroupMap(std::move(g));
  }

  int mode_count() const { return static_cast<int>(group_of_.size()); }
  int group_count() const { return *std::max_element(group_of_.begin(), group_of_.end()) + 1; }
  int group_of(int mode) const { return group_of_.at(static_cast<std::size_t>(mode)); }
  const std::vector<int>& assignment() const { return group_of_; }

  friend bool operator==(const ModeGroupMap&, const ModeGroupMap&) = default;

 private:
  std::vector<int> group_of_;
};

inline constexpr double kDefaultGramTolerance = 1e-6;

/// Ordered orthonormal set of modes sharing one grid.
template <typename Scalar = double>
class ModeBasis {
 public:
  ModeBasis(Grid2D<Scalar> grid, std::vector<ComplexField<Scalar>> modes, std::vector<std::string> labels,
            ModeGroupMap groups, Scalar gram_tol = Scalar(kDefaultGramTolerance))
      : grid_(grid), modes_(std::move(modes)), labels_(std::move(labels)), groups_(std::move(groups)) {
    if (modes_.empty()) throw Error(Errc::InvalidArgument, "basis has no modes");
    if (labels_.size() != modes_.size() || groups_.mode_count() != size())
      throw Error(Errc::InvalidArgument, "labels and group map must have one entry per mode");
    for (const auto& m : modes_)
      if (!(m.grid() == grid_)) throw Error(Errc::GridMismatch, "basis mode on a foreign grid");
    const auto gram = gram_matrix();
    const Scalar err = (gram - ComplexMatrix<Scalar>::Identity(size(), size())).cwiseAbs().maxCoeff();
    if (err > gram_tol)
      throw Error(Errc::BasisNotOrthonormal, "Gram matrix deviates from identity by " + std::to_string(err));
  }

  const Grid2D<Scalar>& grid() const { return grid_; }
  int size() const { return static_cast<int>(modes_.size()); }
  const ComplexField<Scalar>& mode(int k) const { return modes_.at(static_cast<std::size_t>(k)); }
  const std::vector<ComplexField<Scalar>>& modes() const { return modes_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const ModeGroupMap& groups() const { return groups_; }

  ModeBasis with_groups(ModeGroupMap groups) const {
    ModeBasis copy = *this;
    if (groups.mode_count() != size()) throw Error(Errc::InvalidArgument, "group map size does not match basis");
    copy.groups_ = std::move(groups);
    return copy;
  }

  ComplexMatrix<Scalar> gram_matrix() const {
    const int n = size();
    ComplexMatrix<Scalar> g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = inner_product(modes_[std::size_t(i)], modes_[std::size_t(j)]);
    return g;
  }

 private:
  Grid2D<Scalar> grid_;
  std::vector<ComplexField<Scalar>> modes_;
  std::vector<std::string> labels_;
  ModeGroupMap groups_;
};

/// LP01 = HG00, LP11a = HG10, LP11b = HG01, with LP11a/b sharing a mode group.
template <typename Scalar>
ModeBasis<Scalar> build_lp_basis(const Grid2D<Scalar>& grid, Scalar waist, Scalar x0 = 0, Scalar y0 = 0,
                                 Diagnostics* diag = nullptr) {
  std::vector<ComplexField<Scalar>> modes;
  modes.push_back(hg_mode(grid, ModeSpec<Scalar>{0, 0, waist, x0, y0}, diag));
  modes.push_back(hg_mode(grid, ModeSpec<Scalar>{1, 0, waist, x0, y0}));
  modes.push_back(hg_mode(grid, ModeSpec<Scalar>{0, 1, waist, x0, y0}));
  return ModeBasis<Scalar>(grid, std::move(modes), {"LP01", "LP11a", "LP11b"}, ModeGroupMap::lp_default());
}

template <typename Scalar>
using CoefficientVector = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Decomposition {
  CoefficientVector<Scalar> coefficients;
  Scalar captured_fraction = 0;  // sum |c_k|^2 / energy(field), 0 for a zero field
};

template <typename Scalar>
Decomposition<Scalar> decompose(const ComplexField<Scalar>& field, const ModeBasis<Scalar>& basis) {
  if (!(field.grid() == basis.grid())) throw Error(Errc::GridMismatch, "field and basis live on different grids");
  Decomposition<Scalar> out;
  out.coefficients.resize(basis.size());
  for (int k = 0; k < basis.size(); ++k) out.coefficients(k) = inner_product(field, basis.mode(k));
  const Scalar e = field.energy();
  out.captured_fraction = e > 0 ? out.coefficients.squaredNorm() / e : Scalar(0);
  return out;
}

/// Sum c_k mode_k.
template <typename Scalar>
ComplexField<Scalar> synthesize(const ModeBasis<Scalar>& basis, const CoefficientVector<Scalar>& coefficients) {
  if (coefficients.size() != basis.size())
    throw Error(Errc::InvalidArgument, "coefficient count does not match basis size");
  ComplexMatrix<Scalar> s = ComplexMatrix<Scalar>::Zero(basis.grid().ny(), basis.grid().nx());
  for (int k = 0; k < basis.size(); ++k) s += coefficients(k) * basis.mode(k).samples();
  return ComplexField<Scalar>(basis.grid(), std::move(s));
}

using ModeBasisd = ModeBasis<double>;

}  // namespace holobench
