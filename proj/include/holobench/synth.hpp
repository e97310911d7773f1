#pragma once

#include <array>
#include <cstdint>
#include <future>
#include <optional>
#include <random>
#include <vector>

#include "holobench/modes.hpp"

namespace holobench {

enum class Pol { X = 0, Y = 1 };

constexpr char pol_name(Pol p) { return p == Pol::X ? 'X' : 'Y'; }

enum class Scheme { Spatial, Angular };

constexpr std::string_view scheme_name(Scheme s) { return s == Scheme::Spatial ? "spatial" : "angular"; }

/// X and Y components of a polarized field on one grid.
template <typename Scalar = double>
struct JonesField {
  ComplexField<Scalar> x;
  ComplexField<Scalar> y;

  JonesField(ComplexField<Scalar> fx, ComplexField<Scalar> fy) : x(std::move(fx)), y(std::move(fy)) {
    if (!(x.grid() == y.grid())) throw Error(Errc::GridMismatch, "Jones components live on different grids");
  }

  const Grid2D<Scalar>& grid() const { return x.grid(); }
  const ComplexField<Scalar>& operator[](Pol p) const { return p == Pol::X ? x : y; }
  Scalar energy() const { return x.energy() + y.energy(); }
};

/// Quantized camera image. Physical intensity = code * intensity_per_code.
template <typename Scalar = double>
struct CameraFrame {
  using Codes = Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic>;

  Grid2D<Scalar> grid;
  Codes codes;
  Scalar intensity_per_code = 1;
  int bit_depth = 16;

  RealMatrix<Scalar> intensity() const { return codes.template cast<Scalar>() * intensity_per_code; }
  ComplexField<Scalar> as_field() const { return ComplexField<Scalar>::from_real(grid, intensity()); }
};

template <typename Scalar = double>
struct ReferenceBeam {
  Eigen::Matrix<Complex<Scalar>, 2, 1> jones{Complex<Scalar>(1), Complex<Scalar>(0)};
  SpatialFrequency<Scalar> carrier;
  Scalar phase0 = 0;

  /// Polarization component `p` of the beam at unit overall amplitude, including phase0.
  Complex<Scalar> component(Pol p) const {
    return jones(static_cast<int>(p)) * std::polar(Scalar(1), phase0);
  }
};

/// Polarization-resolved reference as seen by the reconstruction of one polarization.
template <typename Scalar>
struct PolReference {
  SpatialFrequency<Scalar> carrier;
  Complex<Scalar> unit_amplitude;  // multiply by the frame's reference amplitude
};

template <typename Scalar = double>
struct SchemeConfig {
  Scheme variant = Scheme::Angular;
  ReferenceBeam<Scalar> reference;    // spatial: one beam, split by the Wollaston
  ReferenceBeam<Scalar> reference_x;  // angular
  ReferenceBeam<Scalar> reference_y;  // angular
  Scalar min_carrier_separation = 0;  // cycles/m
  std::optional<Scalar> reference_amplitude;  // unset: RMS signal amplitude of each frame

  static SchemeConfig spatial_default(const Grid2D<Scalar>& frame) {
    SchemeConfig s;
    s.variant = Scheme::Spatial;
    const Scalar r = std::sqrt(Scalar(0.5));
    s.reference.jones << Complex<Scalar>(r), Complex<Scalar>(r);
    s.reference.carrier = SpatialFrequency<Scalar>::from_bins(frame, Scalar(frame.nx() / 8), Scalar(frame.ny() / 8));
    s.min_carrier_separation = 8 * frame.dfx();
    return s;
  }

  static SchemeConfig angular_default(const Grid2D<Scalar>& frame) {
    SchemeConfig s;
    s.variant = Scheme::Angular;
    s.reference_x.jones << Complex<Scalar>(1), Complex<Scalar>(0);
    s.reference_y.jones << Complex<Scalar>(0), Complex<Scalar>(1);
    s.reference_x.carrier = SpatialFrequency<Scalar>::from_bins(frame, Scalar(frame.nx() / 8), Scalar(frame.ny() / 8));
    s.reference_y.carrier = SpatialFrequency<Scalar>::from_bins(frame, -Scalar(frame.nx() / 8), Scalar(frame.ny() / 8));
    s.min_carrier_separation = 8 * frame.dfx();
    return s;
  }

  /// Sets the Y reference to a linear polarization `angle_rad` away from the X reference.
  void set_relative_polarization(Scalar angle_rad) {
    reference_y.jones << Complex<Scalar>(std::cos(angle_rad)), Complex<Scalar>(std::sin(angle_rad));
  }

  /// Grid on which the device output is imaged: one Wollaston half-region for the spatial
  /// variant, the whole frame for the angular variant.
  Grid2D<Scalar> signal_grid(const Grid2D<Scalar>& frame) const {
    if (variant == Scheme::Angular) return frame;
    if (frame.nx() % 4 != 0)
      throw Error(Errc::InvalidArgument, "spatial scheme needs a frame width divisible by 4");
    return Grid2D<Scalar>(frame.nx() / 2, frame.ny(), frame.pitch_x(), frame.pitch_y());
  }

  Grid2D<Scalar> frame_grid(const Grid2D<Scalar>& signal) const {
    if (variant == Scheme::Angular) return signal;
    return Grid2D<Scalar>(2 * signal.nx(), signal.ny(), signal.pitch_x(), signal.pitch_y());
  }

  PolReference<Scalar> reference_for(Pol p) const {
    if (variant == Scheme::Spatial) return {reference.carrier, reference.component(p)};
    const auto& beam = p == Pol::X ? reference_x : reference_y;
    return {beam.carrier, beam.component(p)};
  }

  void validate(const Grid2D<Scalar>& frame) const {
    auto check_beam = [&](const ReferenceBeam<Scalar>& b, const Grid2D<Scalar>& g, const char* name) {
      if (!(b.jones.norm() > 0)) throw Error(Errc::Config, std::string(name) + " has a zero Jones vector");
      if (std::abs(b.carrier.fx) >= g.nyquist_x() || std::abs(b.carrier.fy) >= g.nyquist_y())
        throw Error(Errc::AliasedCarrier, std::string(name) + " carrier is at or above Nyquist");
    };
    if (reference_amplitude && !(*reference_amplitude >= 0))
      throw Error(Errc::Config, "reference amplitude must be non-negative");
    if (variant == Scheme::Spatial) {
      check_beam(reference, signal_grid(frame), "reference");
      return;
    }
    check_beam(reference_x, frame, "reference X");
    check_beam(reference_y, frame, "reference Y");
    if (physical_norm(reference_x.carrier - reference_y.carrier) < min_carrier_separation)
      throw Error(Errc::Config, "reference carriers are closer than the minimum separation");
  }
};

template <typename Scalar = double>
struct CameraModel {
  int bit_depth = 12;
  Scalar full_scale = 1;
  Scalar noise_sigma = 0;  // additive Gaussian, intensity units
  std::uint64_t rng_seed = 0;

  std::uint32_t max_code() const { return (std::uint32_t{1} << bit_depth) - 1; }

  void validate() const {
    if (bit_depth < 8 || bit_depth > 16) throw Error(Errc::Config, "bit depth must be within [8, 16]");
    if (!(full_scale > 0) || !std::isfinite(full_scale)) throw Error(Errc::Config, "full scale must be positive");
    if (!(noise_sigma >= 0)) throw Error(Errc::Config, "noise sigma must be non-negative");
  }
};

/// Ground-truth device: coefficients of output (mode, out-pol) per input (port, in-pol).
/// Rows: X-pol modes then Y-pol modes. Columns: port-major, X before Y.
template <typename Scalar = double>
struct DeviceModel {
  ComplexMatrix<Scalar> truth;
  ModeBasis<Scalar> basis;

  DeviceModel(ComplexMatrix<Scalar> t, ModeBasis<Scalar> b) : truth(std::move(t)), basis(std::move(b)) {
    if (truth.rows() != 2 * basis.size())
      throw Error(Errc::InvalidArgument, "truth matrix needs 2 x basis-size rows");
    if (truth.cols() == 0 || truth.cols() % 2 != 0)
      throw Error(Errc::InvalidArgument, "truth matrix needs an even, non-zero column count");
    if (!truth.allFinite()) throw Error(Errc::InvalidArgument, "truth matrix has non-finite entries");
  }

  int port_count() const { return static_cast<int>(truth.cols() / 2); }
};

template <typename Scalar>
JonesField<Scalar> synth_output_field(const DeviceModel<Scalar>& device, int port, Pol in_pol) {
  if (port < 0 || port >= device.port_count())
    throw Error(Errc::IndexOutOfRange, "port " + std::to_string(port) + " outside [0, " +
                                           std::to_string(device.port_count()) + ")");
  const Index col = 2 * port + static_cast<int>(in_pol);
  const Index m = device.basis.size();
  CoefficientVector<Scalar> cx = device.truth.col(col).head(m);
  CoefficientVector<Scalar> cy = device.truth.col(col).tail(m);
  return JonesField<Scalar>(synthesize(device.basis, cx), synthesize(device.basis, cy));
}

/// RMS of |E| over the signal grid; falls back to 1 for an all-zero signal.
template <typename Scalar>
Scalar resolve_reference_amplitude(const JonesField<Scalar>& signal, const SchemeConfig<Scalar>& scheme) {
  if (scheme.reference_amplitude) return *scheme.reference_amplitude;
  const Scalar mean_sq = (signal.x.power() + signal.y.power()) / Scalar(signal.grid().size());
  return mean_sq > 0 ? std::sqrt(mean_sq) : Scalar(1);
}

/// Noise-free intensity on the frame grid, |E_sig + E_ref|^2 summed over both polarizations.
/// The spatial variant images X into the left half-region and Y into the right one; each
/// half carries the matching component of the reference in half-region coordinates.
template <typename Scalar>
RealMatrix<Scalar> render_intensity(const JonesField<Scalar>& signal, const SchemeConfig<Scalar>& scheme,
                                    Scalar reference_amplitude) {
  const auto& sg = signal.grid();
  if (scheme.variant == Scheme::Angular) {
    const auto wave_x = plane_wave(sg, reference_amplitude, scheme.reference_x.carrier, scheme.reference_x.phase0);
    const auto wave_y = plane_wave(sg, reference_amplitude, scheme.reference_y.carrier, scheme.reference_y.phase0);
    const auto& jx = scheme.reference_x.jones;
    const auto& jy = scheme.reference_y.jones;
    ComplexMatrix<Scalar> ex = signal.x.samples() + jx(0) * wave_x.samples() + jy(0) * wave_y.samples();
    ComplexMatrix<Scalar> ey = signal.y.samples() + jx(1) * wave_x.samples() + jy(1) * wave_y.samples();
    return ex.cwiseAbs2() + ey.cwiseAbs2();
  }
  const auto wave = plane_wave(sg, reference_amplitude, scheme.reference.carrier, scheme.reference.phase0);
  const auto& j = scheme.reference.jones;
  RealMatrix<Scalar> out(sg.ny(), 2 * sg.nx());
  out.leftCols(sg.nx()) = (signal.x.samples() + j(0) * wave.samples()).cwiseAbs2();
  out.rightCols(sg.nx()) = (signal.y.samples() + j(1) * wave.samples()).cwiseAbs2();
  return out;
}

template <typename Scalar>
CameraFrame<Scalar> quantize(const Grid2D<Scalar>& frame_grid, const RealMatrix<Scalar>& intensity,
                             const CameraModel<Scalar>& camera, Diagnostics* diag = nullptr) {
  camera.validate();
  const Scalar max_code = Scalar(camera.max_code());
  const Scalar gain = max_code / camera.full_scale;
  RealMatrix<Scalar> noisy = intensity;
  if (camera.noise_sigma > 0) {
    std::mt19937_64 rng(camera.rng_seed);
    std::normal_distribution<Scalar> noise(Scalar(0), camera.noise_sigma);
    for (Index i = 0; i < noisy.size(); ++i) noisy(i) += noise(rng);
  }
  CameraFrame<Scalar> frame{frame_grid, typename CameraFrame<Scalar>::Codes(noisy.rows(), noisy.cols()),
                            camera.full_scale / max_code, camera.bit_depth};
  Index clipped = 0;
  for (Index i = 0; i < noisy.size(); ++i) {
    const Scalar code = std::round(noisy(i) * gain);
    if (code < 0 || code > max_code) ++clipped;
    frame.codes(i) = static_cast<std::uint16_t>(std::clamp(code, Scalar(0), max_code));
  }
  if (Scalar(clipped) > Scalar(0.01) * Scalar(noisy.size()))
    warn(diag, Warn::Saturation, std::to_string(clipped) + " of " + std::to_string(noisy.size()) + " pixels clipped");
  return frame;
}

template <typename Scalar>
CameraFrame<Scalar> render_frame(const JonesField<Scalar>& signal, const SchemeConfig<Scalar>& scheme,
                                 const CameraModel<Scalar>& camera, Diagnostics* diag = nullptr) {
  const auto frame_grid = scheme.frame_grid(signal.grid());
  scheme.validate(frame_grid);
  const Scalar amplitude = resolve_reference_amplitude(signal, scheme);
  return quantize(frame_grid, render_intensity(signal, scheme, amplitude), camera, diag);
}

template <typename Scalar = double>
struct Exposure {
  int port = 0;
  Pol in_pol = Pol::X;
  Scalar reference_amplitude = 1;
  CameraFrame<Scalar> frame;
};

/// Frames for every (port, in-pol) excitation, port-major with X before Y. Frame i uses the
/// noise seed camera.rng_seed ^ i, so the result does not depend on scheduling.
template <typename Scalar>
std::vector<Exposure<Scalar>> simulate_measurement(const DeviceModel<Scalar>& device, const SchemeConfig<Scalar>& scheme,
                                                   const CameraModel<Scalar>& camera, Diagnostics* diag = nullptr) {
  camera.validate();
  const auto frame_grid = scheme.frame_grid(device.basis.grid());
  scheme.validate(frame_grid);

  const int n = 2 * device.port_count();
  std::vector<std::future<std::pair<Exposure<Scalar>, Diagnostics>>> jobs;
  jobs.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      const int port = i / 2;
      const Pol pol = i % 2 == 0 ? Pol::X : Pol::Y;
      CameraModel<Scalar> cam = camera;
      cam.rng_seed = camera.rng_seed ^ std::uint64_t(i);
      Diagnostics local;
      const auto signal = synth_output_field(device, port, pol);
      const Scalar amplitude = resolve_reference_amplitude(signal, scheme);
      auto frame = quantize(frame_grid, render_intensity(signal, scheme, amplitude), cam, &local);
      return std::pair{Exposure<Scalar>{port, pol, amplitude, std::move(frame)}, std::move(local)};
    }));
  }
  std::vector<Exposure<Scalar>> out;
  out.reserve(std::size_t(n));
  for (auto& job : jobs) {
    auto [exposure, local] = job.get();
    if (diag) diag->items.insert(diag->items.end(), local.items.begin(), local.items.end());
    out.push_back(std::move(exposure));
  }
  return out;
}

/// Largest noise-free intensity over all excitations, for choosing a camera full scale.
template <typename Scalar>
Scalar peak_intensity(const DeviceModel<Scalar>& device, const SchemeConfig<Scalar>& scheme) {
  Scalar peak = 0;
  for (int port = 0; port < device.port_count(); ++port)
    for (Pol pol : {Pol::X, Pol::Y}) {
      const auto signal = synth_output_field(device, port, pol);
      peak = std::max(peak, render_intensity(signal, scheme, resolve_reference_amplitude(signal, scheme)).maxCoeff());
    }
  return peak;
}

using JonesFieldd = JonesField<double>;
using CameraFramed = CameraFrame<double>;
using SchemeConfigd = SchemeConfig<double>;
using CameraModeld = CameraModel<double>;
using DeviceModeld = DeviceModel<double>;

}  // namespace holobench
