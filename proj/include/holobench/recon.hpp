#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "holobench/synth.hpp"

namespace holobench {

enum class Disambiguation { UpperHalfPlane, NearestToConfigCarrier };

template <typename Scalar = double>
struct SidebandEstimate {
  SpatialFrequency<Scalar> carrier;  // sub-bin refined
  Scalar peak_magnitude = 0;
  Index bin_x = 0;  // offset from DC, bins
  Index bin_y = 0;
  int expected_index = -1;  // which configured location it was matched to, -1 if none
};

template <typename Scalar = double>
struct ReconConfig {
  Scalar dc_exclusion_radius = 0;  // cycles/m
  Scalar crop_radius = 0;          // cycles/m
  int expected_sidebands = 1;
  std::optional<Disambiguation> disambiguation;  // unset: nearest-to-config when carriers are known
  std::vector<SpatialFrequency<Scalar>> expected_carriers;  // where the S R* terms should sit
  Scalar detection_threshold_db = 10;  // required peak-to-median magnitude ratio
  bool use_configured_carrier = true;  // demodulate at the known carrier instead of the estimate
  std::optional<Scalar> reference_amplitude;  // frame's reference amplitude; unset: raw S R* units

  /// DC exclusion nx/16 and crop radius nx/10 in bins of `frame`.
  static ReconConfig defaults(const Grid2D<Scalar>& frame) {
    ReconConfig c;
    c.dc_exclusion_radius = Scalar(frame.nx()) / 16 * frame.dfx();
    c.crop_radius = Scalar(frame.nx()) / 10 * frame.dfx();
    return c;
  }

  Disambiguation rule() const {
    if (disambiguation) return *disambiguation;
    return expected_carriers.empty() ? Disambiguation::UpperHalfPlane : Disambiguation::NearestToConfigCarrier;
  }
};

namespace detail {

template <typename Scalar>
Scalar parabolic_offset(Scalar left, Scalar center, Scalar right) {
  if (!(left > 0) || !(center > 0) || !(right > 0)) return 0;
  const Scalar l = std::log(left), c = std::log(center), r = std::log(right);
  const Scalar denom = l - 2 * c + r;
  if (!(denom < 0)) return 0;
  return std::clamp(Scalar(0.5) * (l - r) / denom, Scalar(-0.5), Scalar(0.5));
}

template <typename Scalar>
Scalar median_of(const RealMatrix<Scalar>& m) {
  std::vector<Scalar> v(m.data(), m.data() + m.size());
  auto mid = v.begin() + std::ptrdiff_t(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

template <typename Scalar>
Scalar nearest_distance(const std::vector<SpatialFrequency<Scalar>>& targets, SpatialFrequency<Scalar> f,
                        int* which = nullptr) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const Scalar d = physical_norm(f - targets[j]);
    if (d < best) {
      best = d;
      if (which) *which = int(j);
    }
  }
  return best;
}

}  // namespace detail

/// Finds the S R* sidebands of a real frame's spectrum: local maxima outside the DC exclusion
/// disk, one per conjugate pair, refined to sub-bin precision and sorted by magnitude.
template <typename Scalar>
std::vector<SidebandEstimate<Scalar>> locate_sidebands(const AngularSpectrum<Scalar>& spectrum,
                                                       const ReconConfig<Scalar>& config) {
  const auto& g = spectrum.grid();
  const RealMatrix<Scalar> mag = spectrum.bins().cwiseAbs();
  const Scalar median = detail::median_of(mag);
  const Scalar floor = std::max(median * std::pow(Scalar(10), config.detection_threshold_db / 20),
                                mag.maxCoeff() * Scalar(1e-12));
  const Index cx = g.nx() / 2, cy = g.ny() / 2;
  const Disambiguation rule = config.rule();
  if (rule == Disambiguation::NearestToConfigCarrier && config.expected_carriers.empty())
    throw Error(Errc::Config, "nearest-to-config disambiguation needs expected carriers");

  struct Candidate {
    Index kx, ky;
    Scalar m;
  };
  std::vector<Candidate> candidates;
  for (Index kx = 1; kx + 1 < g.nx(); ++kx) {
    for (Index ky = 1; ky + 1 < g.ny(); ++ky) {
      const Scalar m = mag(ky, kx);
      if (!(m > 0)) continue;
      if (std::hypot(g.fx(kx), g.fy(ky)) <= config.dc_exclusion_radius) continue;
      bool is_max = true;
      for (Index dy = -1; dy <= 1 && is_max; ++dy)
        for (Index dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const Scalar nb = mag(ky + dy, kx + dx);
          // Plateau ties go to the bin that comes first in scan order.
          if (nb > m || (nb == m && (kx + dx < kx || (kx + dx == kx && ky + dy < ky)))) {
            is_max = false;
            break;
          }
        }
      if (is_max) candidates.push_back({kx, ky, m});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.m != b.m) return a.m > b.m;
    return a.kx != b.kx ? a.kx < b.kx : a.ky < b.ky;
  });

  auto freq = [&](const Candidate& c) { return SpatialFrequency<Scalar>{g.fx(c.kx), g.fy(c.ky)}; };
  auto refine = [&](const Candidate& c, int expected_index) {
    const Scalar ox = detail::parabolic_offset(mag(c.ky, c.kx - 1), c.m, mag(c.ky, c.kx + 1));
    const Scalar oy = detail::parabolic_offset(mag(c.ky - 1, c.kx), c.m, mag(c.ky + 1, c.kx));
    SidebandEstimate<Scalar> s;
    s.carrier = {(Scalar(c.kx - cx) + ox) * g.dfx(), (Scalar(c.ky - cy) + oy) * g.dfy()};
    s.peak_magnitude = c.m;
    s.bin_x = c.kx - cx;
    s.bin_y = c.ky - cy;
    s.expected_index = expected_index;
    return s;
  };

  std::vector<SidebandEstimate<Scalar>> found;
  Scalar strongest = 0;
  if (rule == Disambiguation::UpperHalfPlane) {
    for (const auto& c : candidates) {
      if (int(found.size()) == config.expected_sidebands) break;
      if (c.ky < cy) continue;  // the mirror in the upper half represents this pair
      strongest = std::max(strongest, c.m);
      if (c.m < floor) break;
      if (c.ky == cy)
        throw Error(Errc::ConjugateAmbiguity, "sideband at bin (" + std::to_string(c.kx - cx) +
                                                  ", 0) lies on the upper-half-plane boundary");
      const auto f = freq(c);
      const bool suppressed = std::any_of(found.begin(), found.end(), [&](const SidebandEstimate<Scalar>& s) {
        return physical_norm(f - s.carrier) <= config.crop_radius;
      });
      if (!suppressed) found.push_back(refine(c, -1));
    }
  } else {
    const auto& expected = config.expected_carriers;
    std::vector<bool> taken(expected.size(), false);
    for (const auto& c : candidates) {
      const auto f = freq(c);
      int which = -1;
      const Scalar d = detail::nearest_distance(expected, f, &which);
      if (d > config.crop_radius) continue;
      const Scalar d_mirror = detail::nearest_distance(expected, -f);
      if (d_mirror == d)
        throw Error(Errc::ConjugateAmbiguity, "sideband and its conjugate are equidistant from the configured carriers");
      if (d_mirror < d || taken[std::size_t(which)]) continue;
      strongest = std::max(strongest, c.m);
      if (c.m < floor) continue;
      taken[std::size_t(which)] = true;
      found.push_back(refine(c, which));
      if (int(found.size()) == config.expected_sidebands) break;
    }
  }
  if (found.empty()) {
    const Scalar ratio_db = median > 0 && strongest > 0 ? 20 * std::log10(strongest / median)
                                                                : -std::numeric_limits<Scalar>::infinity();
    throw Error(Errc::NoSideband, "no sideband above the detection threshold (strongest candidate " +
                                      std::to_string(ratio_db) + " dB above median)");
  }
  return found;
}

template <typename Scalar = double>
struct ExtractedField {
  ComplexField<Scalar> field;
  bool normalized = false;  // false: raw S R* units
  SpatialFrequency<Scalar> residual;
};

/// Crops the sideband at `carrier`, moves it to baseband and removes the sub-bin residual
/// carrier. With `reference` (the complex reference amplitude of this polarization) the
/// result is divided by conj(reference), which turns S R* into S for a plane-wave reference.
template <typename Scalar>
ExtractedField<Scalar> extract_from_spectrum(const AngularSpectrum<Scalar>& spectrum, SpatialFrequency<Scalar> carrier,
                                             Scalar crop_radius, std::optional<Complex<Scalar>> reference = {},
                                             Diagnostics* diag = nullptr) {
  auto crop = crop_recenter(spectrum, carrier, crop_radius, diag);
  auto field = ifft2(crop.spectrum);
  if (crop.residual.fx != 0 || crop.residual.fy != 0) field = demodulate(field, crop.residual);
  if (!reference) return {std::move(field), false, crop.residual};
  if (!(std::abs(*reference) > 0)) throw Error(Errc::Config, "reference amplitude for this polarization is zero");
  return {Complex<Scalar>(1) / std::conj(*reference) * field, true, crop.residual};
}

template <typename Scalar>
ExtractedField<Scalar> extract_field(const ComplexField<Scalar>& intensity, const SidebandEstimate<Scalar>& carrier,
                                     const ReconConfig<Scalar>& config, std::optional<Complex<Scalar>> reference = {},
                                     Diagnostics* diag = nullptr) {
  return extract_from_spectrum(fft2(intensity), carrier.carrier, config.crop_radius, reference, diag);
}

template <typename Scalar>
ExtractedField<Scalar> extract_field(const CameraFrame<Scalar>& frame, const SidebandEstimate<Scalar>& carrier,
                                     const ReconConfig<Scalar>& config, std::optional<Complex<Scalar>> reference = {},
                                     Diagnostics* diag = nullptr) {
  return extract_field(frame.as_field(), carrier, config, reference, diag);
}

template <typename Scalar = double>
struct Reconstruction {
  JonesField<Scalar> field;
  std::vector<SidebandEstimate<Scalar>> detected;  // what the frame itself showed
  std::array<SpatialFrequency<Scalar>, 2> used;    // demodulation carrier per polarization
  bool normalized = false;
};

namespace detail {

template <typename Scalar>
void check_crop_geometry(const Grid2D<Scalar>& grid, const std::vector<SpatialFrequency<Scalar>>& holograms,
                         Scalar crop_radius) {
  const Scalar min_radius = 2 * std::max(grid.dfx(), grid.dfy());
  if (crop_radius < min_radius) throw Error(Errc::Config, "crop radius must be at least 2 bins");
  for (std::size_t i = 0; i < holograms.size(); ++i) {
    if (physical_norm(holograms[i]) <= crop_radius)
      throw Error(Errc::CropOverlap, "crop disk overlaps its own conjugate image");
    for (std::size_t j = i + 1; j < holograms.size(); ++j)
      if (physical_norm(holograms[i] - holograms[j]) <= 2 * crop_radius ||
          physical_norm(holograms[i] + holograms[j]) <= 2 * crop_radius)
        throw Error(Errc::CropOverlap, "crop disks of the two polarizations intersect");
  }
}

template <typename Scalar>
std::optional<Complex<Scalar>> reference_of(const SchemeConfig<Scalar>& scheme, const ReconConfig<Scalar>& config,
                                            Pol p) {
  if (!config.reference_amplitude) return std::nullopt;
  return *config.reference_amplitude * scheme.reference_for(p).unit_amplitude;
}

}  // namespace detail

/// Camera frame to per-polarization complex fields. The spatial variant processes the two
/// Wollaston half-regions separately on half-width grids; the angular variant separates both
/// holograms from one spectrum and assigns them by proximity to the configured carriers.
template <typename Scalar>
Reconstruction<Scalar> reconstruct(const CameraFrame<Scalar>& frame, const SchemeConfig<Scalar>& scheme,
                                   const ReconConfig<Scalar>& config, Diagnostics* diag = nullptr) {
  scheme.validate(frame.grid);
  const auto sg = scheme.signal_grid(frame.grid);
  const std::array<SpatialFrequency<Scalar>, 2> holograms{-scheme.reference_for(Pol::X).carrier,
                                                          -scheme.reference_for(Pol::Y).carrier};
  const bool blind = config.disambiguation == Disambiguation::UpperHalfPlane;
  const auto intensity = frame.intensity();

  if (scheme.variant == Scheme::Spatial) {
    detail::check_crop_geometry(sg, {holograms[0]}, config.crop_radius);
    std::vector<ComplexField<Scalar>> parts;
    std::vector<SidebandEstimate<Scalar>> detected;
    std::array<SpatialFrequency<Scalar>, 2> used{};
    int missing = 0;
    for (Pol p : {Pol::X, Pol::Y}) {
      const Index col0 = p == Pol::X ? 0 : sg.nx();
      const auto half = ComplexField<Scalar>::from_real(sg, intensity.middleCols(col0, sg.nx()));
      const auto spectrum = fft2(half);
      ReconConfig<Scalar> local = config;
      local.expected_sidebands = 1;
      local.expected_carriers = {holograms[std::size_t(p)]};
      std::optional<SidebandEstimate<Scalar>> hit;
      try {
        hit = locate_sidebands(spectrum, local).front();
      } catch (const Error& e) {
        if (e.code() != Errc::NoSideband) throw;
        ++missing;
      }
      bool mirrored = false;
      SpatialFrequency<Scalar> carrier = holograms[std::size_t(p)];
      if (hit) {
        detected.push_back(*hit);
        if (blind) mirrored = physical_norm(hit->carrier + carrier) < physical_norm(hit->carrier - carrier);
        if (!config.use_configured_carrier) carrier = mirrored ? -hit->carrier : hit->carrier;
      }
      used[std::size_t(p)] = carrier;
      const auto ref = detail::reference_of(scheme, config, p);
      if (!mirrored) {
        parts.push_back(extract_from_spectrum(spectrum, carrier, config.crop_radius, ref, diag).field);
      } else {
        // S* R sideband: extract it and conjugate to recover S R*.
        auto raw = extract_from_spectrum(spectrum, -carrier, config.crop_radius, std::optional<Complex<Scalar>>{}, diag).field;
        ComplexField<Scalar> s(sg, raw.samples().conjugate());
        parts.push_back(ref ? Complex<Scalar>(1) / std::conj(*ref) * s : s);
      }
    }
    if (missing == 2) throw Error(Errc::NoSideband, "neither Wollaston half-region shows a sideband");
    return {JonesField<Scalar>(std::move(parts[0]), std::move(parts[1])), std::move(detected), used,
            config.reference_amplitude.has_value()};
  }

  detail::check_crop_geometry(sg, {holograms[0], holograms[1]}, config.crop_radius);
  const auto spectrum = fft2(ComplexField<Scalar>::from_real(sg, intensity));
  ReconConfig<Scalar> local = config;
  local.expected_sidebands = 2;
  local.expected_carriers = {holograms[0], holograms[1]};
  auto detected = locate_sidebands(spectrum, local);

  // Assign each detected sideband to the nearest configured hologram (or its mirror in blind mode).
  std::array<std::optional<SidebandEstimate<Scalar>>, 2> assigned;
  std::array<bool, 2> mirrored{false, false};
  for (const auto& s : detected) {
    int best = -1;
    bool best_mirror = false;
    Scalar best_d = std::numeric_limits<Scalar>::infinity();
    for (int p = 0; p < 2; ++p)
      for (bool m : {false, true}) {
        if (m && !blind) continue;
        const Scalar d = physical_norm(s.carrier - (m ? -holograms[std::size_t(p)] : holograms[std::size_t(p)]));
        if (d < best_d) best_d = d, best = p, best_mirror = m;
      }
    if (assigned[std::size_t(best)])
      throw Error(Errc::SidebandAssignmentAmbiguous, "both sidebands are nearest to the " +
                                                         std::string(1, pol_name(Pol(best))) + " reference carrier");
    assigned[std::size_t(best)] = s;
    mirrored[std::size_t(best)] = best_mirror;
  }

  std::array<SpatialFrequency<Scalar>, 2> used{};
  std::vector<ComplexField<Scalar>> parts;
  for (Pol p : {Pol::X, Pol::Y}) {
    const std::size_t i = std::size_t(p);
    SpatialFrequency<Scalar> carrier = holograms[i];
    if (assigned[i] && !config.use_configured_carrier) carrier = mirrored[i] ? -assigned[i]->carrier : assigned[i]->carrier;
    used[i] = carrier;
    const auto ref = detail::reference_of(scheme, config, p);
    if (!mirrored[i]) {
      parts.push_back(extract_from_spectrum(spectrum, carrier, config.crop_radius, ref, diag).field);
    } else {
      auto raw = extract_from_spectrum(spectrum, -carrier, config.crop_radius, std::optional<Complex<Scalar>>{}, diag).field;
      ComplexField<Scalar> s(sg, raw.samples().conjugate());
      parts.push_back(ref ? Complex<Scalar>(1) / std::conj(*ref) * s : s);
    }
  }
  return {JonesField<Scalar>(std::move(parts[0]), std::move(parts[1])), std::move(detected), used,
          config.reference_amplitude.has_value()};
}

using ReconConfigd = ReconConfig<double>;
using SidebandEstimated = SidebandEstimate<double>;

}  // namespace holobench
