#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "holobench/errors.hpp"

namespace holobench {

using Index = Eigen::Index;

template <typename Scalar>
using Complex = std::complex<Scalar>;

/// Sample matrix layout: rows index y, columns index x.
template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Uniform sampling grid with the physical origin at pixel (nx/2, ny/2).
template <typename Scalar = double>
class Grid2D {
 public:
  Grid2D(Index nx, Index ny, Scalar pitch_x, Scalar pitch_y)
      : nx_(nx), ny_(ny), pitch_x_(pitch_x), pitch_y_(pitch_y) {
    if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0)
      throw Error(Errc::InvalidArgument, "grid sizes must be even and >= 8, got " +
                                             std::to_string(nx) + "x" + std::to_string(ny));
    if (!(pitch_x > 0) || !(pitch_y > 0) || !std::isfinite(pitch_x) || !std::isfinite(pitch_y))
      throw Error(Errc::InvalidArgument, "grid pitch must be positive and finite");
  }

  Grid2D(Index nx, Index ny, Scalar pitch) : Grid2D(nx, ny, pitch, pitch) {}

  Index nx() const { return nx_; }
  Index ny() const { return ny_; }
  Index size() const { return nx_ * ny_; }
  Scalar pitch_x() const { return pitch_x_; }
  Scalar pitch_y() const { return pitch_y_; }
  Scalar pixel_area() const { return pitch_x_ * pitch_y_; }

  Scalar x(Index ix) const { return Scalar(ix - nx_ / 2) * pitch_x_; }
  Scalar y(Index iy) const { return Scalar(iy - ny_ / 2) * pitch_y_; }
  Scalar extent_x() const { return Scalar(nx_) * pitch_x_; }
  Scalar extent_y() const { return Scalar(ny_) * pitch_y_; }

  // Frequency axes of the centered spectrum, cycles/meter.
  Scalar dfx() const { return Scalar(1) / extent_x(); }
  Scalar dfy() const { return Scalar(1) / extent_y(); }
  Scalar fx(Index kx) const { return Scalar(kx - nx_ / 2) * dfx(); }
  Scalar fy(Index ky) const { return Scalar(ky - ny_ / 2) * dfy(); }
  Scalar nyquist_x() const { return Scalar(0.5) / pitch_x_; }
  Scalar nyquist_y() const { return Scalar(0.5) / pitch_y_; }

  friend bool operator==(const Grid2D& a, const Grid2D& b) {
    return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.pitch_x_ == b.pitch_x_ && a.pitch_y_ == b.pitch_y_;
  }

 private:
  Index nx_, ny_;
  Scalar pitch_x_, pitch_y_;
};

/// A spatial frequency in cycles/meter. A tilt angle maps to it via f = sin(theta)/lambda.
template <typename Scalar = double>
struct SpatialFrequency {
  Scalar fx{0};
  Scalar fy{0};

  static SpatialFrequency from_bins(const Grid2D<Scalar>& grid, Scalar bx, Scalar by) {
    return {bx * grid.dfx(), by * grid.dfy()};
  }
  Scalar bins_x(const Grid2D<Scalar>& grid) const { return fx / grid.dfx(); }
  Scalar bins_y(const Grid2D<Scalar>& grid) const { return fy / grid.dfy(); }

  SpatialFrequency operator-() const { return {-fx, -fy}; }
  friend SpatialFrequency operator-(SpatialFrequency a, SpatialFrequency b) { return {a.fx - b.fx, a.fy - b.fy}; }
  friend SpatialFrequency operator+(SpatialFrequency a, SpatialFrequency b) { return {a.fx + b.fx, a.fy + b.fy}; }
  friend bool operator==(const SpatialFrequency&, const SpatialFrequency&) = default;
};

/// Distance between two frequencies measured in bins of `grid`.
template <typename Scalar>
Scalar bin_distance(const Grid2D<Scalar>& grid, SpatialFrequency<Scalar> a, SpatialFrequency<Scalar> b) {
  return std::hypot((a.fx - b.fx) / grid.dfx(), (a.fy - b.fy) / grid.dfy());
}

template <typename Scalar>
Scalar physical_norm(SpatialFrequency<Scalar> f) {
  return std::hypot(f.fx, f.fy);
}

namespace detail {

template <typename Scalar>
void check_finite(const ComplexMatrix<Scalar>& m) {
  if (!m.allFinite()) throw Error(Errc::InvalidArgument, "field samples must be finite");
}

template <typename Scalar>
void check_shape(const Grid2D<Scalar>& grid, const ComplexMatrix<Scalar>& m) {
  if (m.rows() != grid.ny() || m.cols() != grid.nx())
    throw Error(Errc::InvalidArgument, "sample matrix is " + std::to_string(m.cols()) + "x" +
                                           std::to_string(m.rows()) + ", grid is " +
                                           std::to_string(grid.nx()) + "x" + std::to_string(grid.ny()));
}

}  // namespace detail

/// Sampled complex optical field.
template <typename Scalar = double>
class ComplexField {
 public:
  using Matrix = ComplexMatrix<Scalar>;

  ComplexField(Grid2D<Scalar> grid, Matrix samples) : grid_(grid), samples_(std::move(samples)) {
    detail::check_shape(grid_, samples_);
    detail::check_finite(samples_);
  }

  static ComplexField zero(const Grid2D<Scalar>& grid) {
    return ComplexField(grid, Matrix::Zero(grid.ny(), grid.nx()));
  }

  /// Real-valued field, e.g. a camera intensity image.
  static ComplexField from_real(const Grid2D<Scalar>& grid, const RealMatrix<Scalar>& real) {
    return ComplexField(grid, real.template cast<Complex<Scalar>>());
  }

  const Grid2D<Scalar>& grid() const { return grid_; }
  const Matrix& samples() const { return samples_; }
  Complex<Scalar> operator()(Index iy, Index ix) const { return samples_(iy, ix); }

  /// Sum of squared magnitudes (preserved by fft2).
  Scalar power() const { return samples_.squaredNorm(); }

  /// Overlap-integral self energy, sum |s|^2 dA.
  Scalar energy() const { return power() * grid_.pixel_area(); }

  ComplexField operator+(const ComplexField& other) const {
    require_same_grid(other);
    return ComplexField(grid_, samples_ + other.samples_);
  }
  ComplexField operator-(const ComplexField& other) const {
    require_same_grid(other);
    return ComplexField(grid_, samples_ - other.samples_);
  }
  friend ComplexField operator*(Complex<Scalar> a, const ComplexField& f) {
    return ComplexField(f.grid_, a * f.samples_);
  }

 private:
  void require_same_grid(const ComplexField& other) const {
    if (!(grid_ == other.grid_)) throw Error(Errc::GridMismatch, "fields live on different grids");
  }

  Grid2D<Scalar> grid_;
  Matrix samples_;
};

/// Centered, unitary-normalized spectrum of a ComplexField. The DC bin sits at (nx/2, ny/2);
/// bin (kx, ky) has frequency grid.fx(kx), grid.fy(ky).
template <typename Scalar = double>
class AngularSpectrum {
 public:
  using Matrix = ComplexMatrix<Scalar>;

  /// Wraps externally produced bins. Callers guarantee the centered unitary convention.
  static AngularSpectrum from_bins(Grid2D<Scalar> grid, Matrix bins) {
    return AngularSpectrum(grid, std::move(bins));
  }

  const Grid2D<Scalar>& grid() const { return grid_; }
  const Matrix& bins() const { return bins_; }
  Complex<Scalar> operator()(Index ky, Index kx) const { return bins_(ky, kx); }
  Scalar power() const { return bins_.squaredNorm(); }

  /// Nearest bin to a physical frequency.
  std::pair<Index, Index> bin_of(SpatialFrequency<Scalar> f) const {
    return {grid_.nx() / 2 + Index(std::lround(f.fx / grid_.dfx())),
            grid_.ny() / 2 + Index(std::lround(f.fy / grid_.dfy()))};
  }

 private:
  AngularSpectrum(Grid2D<Scalar> grid, Matrix bins) : grid_(grid), bins_(std::move(bins)) {
    detail::check_shape(grid_, bins_);
    detail::check_finite(bins_);
  }

  Grid2D<Scalar> grid_;
  Matrix bins_;
};

namespace detail {

/// Circular shift by half the size on both axes. For even sizes it is its own inverse.
template <typename Scalar>
ComplexMatrix<Scalar> half_shift(const ComplexMatrix<Scalar>& m) {
  const Index ny = m.rows(), nx = m.cols();
  const Index hy = ny / 2, hx = nx / 2;
  ComplexMatrix<Scalar> out(ny, nx);
  out.topLeftCorner(hy, hx) = m.bottomRightCorner(hy, hx);
  out.topRightCorner(hy, nx - hx) = m.bottomLeftCorner(hy, nx - hx);
  out.bottomLeftCorner(ny - hy, hx) = m.topRightCorner(ny - hy, hx);
  out.bottomRightCorner(ny - hy, nx - hx) = m.topLeftCorner(ny - hy, nx - hx);
  return out;
}

template <typename Scalar>
ComplexMatrix<Scalar> unitary_dft2(const ComplexMatrix<Scalar>& centered, bool inverse) {
  Eigen::FFT<Scalar> fft;
  fft.SetFlag(Eigen::FFT<Scalar>::Unscaled);
  ComplexMatrix<Scalar> work = half_shift<Scalar>(centered);
  const Index ny = work.rows(), nx = work.cols();

  Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1> in, out;
  for (Index iy = 0; iy < ny; ++iy) {
    in = work.row(iy).transpose();
    if (inverse) fft.inv(out, in); else fft.fwd(out, in);
    work.row(iy) = out.transpose();
  }
  for (Index ix = 0; ix < nx; ++ix) {
    in = work.col(ix);
    if (inverse) fft.inv(out, in); else fft.fwd(out, in);
    work.col(ix) = out;
  }
  work *= Scalar(1) / std::sqrt(Scalar(nx * ny));
  return half_shift<Scalar>(work);
}

}  // namespace detail

template <typename Scalar>
AngularSpectrum<Scalar> fft2(const ComplexField<Scalar>& field) {
  return AngularSpectrum<Scalar>::from_bins(field.grid(), detail::unitary_dft2<Scalar>(field.samples(), false));
}

template <typename Scalar>
ComplexField<Scalar> ifft2(const AngularSpectrum<Scalar>& spectrum) {
  return ComplexField<Scalar>(spectrum.grid(), detail::unitary_dft2<Scalar>(spectrum.bins(), true));
}

/// amplitude * exp(i(2 pi (fx x + fy y) + phase0)) with x, y measured from the grid center.
template <typename Scalar>
ComplexField<Scalar> plane_wave(const Grid2D<Scalar>& grid, Scalar amplitude, SpatialFrequency<Scalar> carrier,
                                Scalar phase0 = 0) {
  if (std::abs(carrier.fx) >= grid.nyquist_x() || std::abs(carrier.fy) >= grid.nyquist_y())
    throw Error(Errc::AliasedCarrier, "carrier (" + std::to_string(carrier.fx) + ", " +
                                          std::to_string(carrier.fy) + ") cycles/m is at or above Nyquist");
  constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  ComplexMatrix<Scalar> s(grid.ny(), grid.nx());
  for (Index ix = 0; ix < grid.nx(); ++ix) {
    const Scalar px = two_pi * carrier.fx * grid.x(ix) + phase0;
    for (Index iy = 0; iy < grid.ny(); ++iy)
      s(iy, ix) = std::polar(amplitude, px + two_pi * carrier.fy * grid.y(iy));
  }
  return ComplexField<Scalar>(grid, std::move(s));
}

/// Multiplies a field by exp(-i 2 pi (fx x + fy y)).
template <typename Scalar>
ComplexField<Scalar> demodulate(const ComplexField<Scalar>& field, SpatialFrequency<Scalar> f) {
  constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  const auto& grid = field.grid();
  ComplexMatrix<Scalar> s = field.samples();
  for (Index ix = 0; ix < grid.nx(); ++ix)
    for (Index iy = 0; iy < grid.ny(); ++iy)
      s(iy, ix) *= std::polar(Scalar(1), -two_pi * (f.fx * grid.x(ix) + f.fy * grid.y(iy)));
  return ComplexField<Scalar>(grid, std::move(s));
}

template <typename Scalar>
struct CropResult {
  AngularSpectrum<Scalar> spectrum;
  Index shift_x;  // bins moved from the crop center to DC
  Index shift_y;
  SpatialFrequency<Scalar> residual;  // sub-bin carrier left after the integer shift
};

/// Copies the bins inside a circle of `radius` around `center` into an otherwise empty
/// spectrum, moving the nearest bin of `center` to DC.
template <typename Scalar>
CropResult<Scalar> crop_recenter(const AngularSpectrum<Scalar>& spectrum, SpatialFrequency<Scalar> center,
                                 Scalar radius, Diagnostics* diag = nullptr) {
  const auto& g = spectrum.grid();
  if (!(radius > 0)) throw Error(Errc::InvalidArgument, "crop radius must be positive");

  const Scalar cbx = center.fx / g.dfx(), cby = center.fy / g.dfy();
  const Scalar rbx = radius / g.dfx(), rby = radius / g.dfy();
  const Scalar hx = Scalar(g.nx() / 2), hy = Scalar(g.ny() / 2);
  if (cbx - rbx < -hx || cbx + rbx > hx - 1 || cby - rby < -hy || cby + rby > hy - 1)
    throw Error(Errc::CropOutOfBounds, "crop circle around (" + std::to_string(cbx) + ", " + std::to_string(cby) +
                                           ") bins with radius " + std::to_string(rbx) + " exceeds the spectrum");

  const Index sx = Index(std::lround(cbx)), sy = Index(std::lround(cby));
  if ((sx != 0 || sy != 0) && center.fx * center.fx + center.fy * center.fy <= radius * radius)
    warn(diag, Warn::DcContamination, "crop circle includes the DC bin");

  const Scalar r2 = radius * radius;
  ComplexMatrix<Scalar> out = ComplexMatrix<Scalar>::Zero(g.ny(), g.nx());
  const Index kx_lo = std::max<Index>(0, Index(std::floor(cbx - rbx + hx)));
  const Index kx_hi = std::min<Index>(g.nx() - 1, Index(std::ceil(cbx + rbx + hx)));
  const Index ky_lo = std::max<Index>(0, Index(std::floor(cby - rby + hy)));
  const Index ky_hi = std::min<Index>(g.ny() - 1, Index(std::ceil(cby + rby + hy)));
  for (Index kx = kx_lo; kx <= kx_hi; ++kx) {
    const Scalar dx = g.fx(kx) - center.fx;
    for (Index ky = ky_lo; ky <= ky_hi; ++ky) {
      const Scalar dy = g.fy(ky) - center.fy;
      if (dx * dx + dy * dy <= r2)
        out((ky - sy + g.ny()) % g.ny(), (kx - sx + g.nx()) % g.nx()) = spectrum(ky, kx);
    }
  }
  SpatialFrequency<Scalar> residual{center.fx - Scalar(sx) * g.dfx(), center.fy - Scalar(sy) * g.dfy()};
  return {AngularSpectrum<Scalar>::from_bins(g, std::move(out)), sx, sy, residual};
}

/// Discrete overlap integral sum conj(b) a dA.
template <typename Scalar>
Complex<Scalar> inner_product(const ComplexField<Scalar>& a, const ComplexField<Scalar>& b) {
  if (!(a.grid() == b.grid())) throw Error(Errc::GridMismatch, "inner_product operands live on different grids");
  return (b.samples().conjugate().cwiseProduct(a.samples())).sum() * a.grid().pixel_area();
}

using Grid2Dd = Grid2D<double>;
using ComplexFieldd = ComplexField<double>;
using AngularSpectrumd = AngularSpectrum<double>;
using SpatialFrequencyd = SpatialFrequency<double>;

}  // namespace holobench
