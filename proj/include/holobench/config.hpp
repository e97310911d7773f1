#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "holobench/device.hpp"
#include "holobench/recon.hpp"

namespace holobench::io {

namespace fs = std::filesystem;

/// Everything a run needs. Loaded from a JSON file; command-line flags override it.
/// Carrier positions and recon radii are given in bins of the full camera frame.
struct RunConfig {
  Index nx = 256;
  Index ny = 256;
  double pitch = 20e-6;
  double wavelength = 1550e-9;
  std::string scheme = "both";  // spatial | angular | both
  std::uint64_t seed = 1;

  std::optional<std::array<double, 2>> spatial_carrier_bins;
  std::array<Complex<double>, 2> spatial_jones{Complex<double>(std::sqrt(0.5)), Complex<double>(std::sqrt(0.5))};
  double spatial_phase0 = 0;

  std::optional<std::array<double, 2>> angular_carrier_x_bins;
  std::optional<std::array<double, 2>> angular_carrier_y_bins;
  double relative_polarization_deg = 90;
  double min_carrier_separation_bins = 8;

  std::optional<double> reference_amplitude;

  int bit_depth = 12;
  std::optional<double> full_scale;  // unset: headroom * peak noise-free intensity of the run
  double full_scale_headroom = 1.05;
  double noise_sigma_fraction = 0;  // noise std as a fraction of full scale

  std::optional<double> waist;  // unset: 0.4 * (nx * pitch / 4)
  double center_x = 0;
  double center_y = 0;
  std::string groups = "lp";  // lp | per-mode

  std::optional<double> dc_exclusion_bins;
  std::optional<double> crop_radius_bins;
  std::string disambiguation = "auto";  // auto | upper-half-plane | nearest-to-config-carrier
  bool use_configured_carrier = true;
  bool normalize_by_reference = true;

  std::optional<fs::path> truth_file;
  DeviceTarget<double> generate;

  fs::path out_dir = "holobench_out";
  std::optional<fs::path> in_dir;

  Grid2Dd frame_grid() const { return Grid2Dd(nx, ny, pitch); }
  double resolved_waist() const { return waist.value_or(0.4 * double(nx) * pitch / 4); }
  ModeGroupMap group_map(int modes) const;

  /// Scheme geometry for `variant` on this frame grid.
  SchemeConfigd scheme_config(Scheme variant) const;
  ReconConfigd recon_config() const;
  CameraModeld camera(double full_scale) const;

  void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir = {});
RunConfig load_config(const fs::path& path);
nlohmann::json config_to_json(const RunConfig& c);

Scheme parse_scheme(const std::string& name);

}  // namespace holobench::io
