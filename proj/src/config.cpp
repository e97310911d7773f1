#include "holobench/config.hpp"

#include <numbers>
#include <set>

#include "holobench/formats.hpp"

namespace holobench::io {

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(Errc::Config, where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw Error(Errc::Config, "unknown key \"" + key + "\" in " + where);
}

std::array<double, 2> pair_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw Error(Errc::Config, where + " must be a two-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

Complex<double> complex_of(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  const auto p = pair_of(j, where);
  return {p[0], p[1]};
}

json pair_json(const std::array<double, 2>& p) { return json::array({p[0], p[1]}); }

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "spatial") return Scheme::Spatial;
  if (name == "angular") return Scheme::Angular;
  throw Error(Errc::Config, "unknown scheme \"" + name + "\" (expected spatial or angular)");
}

ModeGroupMap RunConfig::group_map(int modes) const {
  if (groups == "per-mode") return ModeGroupMap::each_mode_own_group(modes);
  if (groups == "lp") {
    if (modes != 3) throw Error(Errc::Config, "the lp group map needs the three-mode LP basis");
    return ModeGroupMap::lp_default();
  }
  throw Error(Errc::Config, "unknown group map \"" + groups + "\" (expected lp or per-mode)");
}

SchemeConfigd RunConfig::scheme_config(Scheme variant) const {
  const auto grid = frame_grid();
  SchemeConfigd s = variant == Scheme::Spatial ? SchemeConfigd::spatial_default(grid) : SchemeConfigd::angular_default(grid);
  s.reference_amplitude = reference_amplitude;
  s.min_carrier_separation = min_carrier_separation_bins * grid.dfx();
  if (variant == Scheme::Spatial) {
    if (spatial_carrier_bins)
      s.reference.carrier = SpatialFrequencyd::from_bins(grid, (*spatial_carrier_bins)[0], (*spatial_carrier_bins)[1]);
    s.reference.jones << spatial_jones[0], spatial_jones[1];
    s.reference.phase0 = spatial_phase0;
  } else {
    if (angular_carrier_x_bins)
      s.reference_x.carrier =
          SpatialFrequencyd::from_bins(grid, (*angular_carrier_x_bins)[0], (*angular_carrier_x_bins)[1]);
    if (angular_carrier_y_bins)
      s.reference_y.carrier =
          SpatialFrequencyd::from_bins(grid, (*angular_carrier_y_bins)[0], (*angular_carrier_y_bins)[1]);
    s.set_relative_polarization(relative_polarization_deg * std::numbers::pi / 180);
  }
  return s;
}

ReconConfigd RunConfig::recon_config() const {
  const auto grid = frame_grid();
  auto r = ReconConfigd::defaults(grid);
  if (dc_exclusion_bins) r.dc_exclusion_radius = *dc_exclusion_bins * grid.dfx();
  if (crop_radius_bins) r.crop_radius = *crop_radius_bins * grid.dfx();
  if (disambiguation == "upper-half-plane") r.disambiguation = Disambiguation::UpperHalfPlane;
  else if (disambiguation == "nearest-to-config-carrier") r.disambiguation = Disambiguation::NearestToConfigCarrier;
  else if (disambiguation != "auto") throw Error(Errc::Config, "unknown disambiguation \"" + disambiguation + "\"");
  r.use_configured_carrier = use_configured_carrier;
  return r;
}

CameraModeld RunConfig::camera(double fs) const {
  CameraModeld c;
  c.bit_depth = bit_depth;
  c.full_scale = fs;
  c.noise_sigma = noise_sigma_fraction * fs;
  c.rng_seed = seed;
  c.validate();
  return c;
}

void RunConfig::validate() const {
  const auto grid = frame_grid();
  if (!(wavelength > 0)) throw Error(Errc::Config, "wavelength must be positive");
  if (scheme != "both") parse_scheme(scheme);
  if (!(noise_sigma_fraction >= 0)) throw Error(Errc::Config, "noise_sigma_fraction must be non-negative");
  if (full_scale && !(*full_scale > 0)) throw Error(Errc::Config, "camera full_scale must be positive");
  if (!(full_scale_headroom >= 1)) throw Error(Errc::Config, "full_scale_headroom must be at least 1");
  if (!(resolved_waist() > 0)) throw Error(Errc::Config, "basis waist must be positive");
  camera(1.0);
  recon_config();
  group_map(3);
  for (Scheme v : {Scheme::Spatial, Scheme::Angular})
    if (scheme == "both" || parse_scheme(scheme) == v) scheme_config(v).validate(grid);
}

RunConfig config_from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    reject_unknown(j, {"grid", "wavelength", "scheme", "seed", "spatial", "angular", "reference_amplitude", "camera",
                       "basis", "recon", "device", "out_dir", "in_dir"},
                   "config");
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      reject_unknown(g, {"nx", "ny", "pitch"}, "grid");
      c.nx = g.value("nx", c.nx);
      c.ny = g.value("ny", c.ny);
      c.pitch = g.value("pitch", c.pitch);
    }
    c.wavelength = j.value("wavelength", c.wavelength);
    c.scheme = j.value("scheme", c.scheme);
    c.seed = j.value("seed", c.seed);
    if (j.contains("spatial")) {
      const auto& s = j["spatial"];
      reject_unknown(s, {"carrier_bins", "jones", "phase0"}, "spatial");
      if (s.contains("carrier_bins")) c.spatial_carrier_bins = pair_of(s["carrier_bins"], "spatial.carrier_bins");
      if (s.contains("jones")) {
        const auto& jj = s["jones"];
        if (!jj.is_array() || jj.size() != 2) throw Error(Errc::Config, "spatial.jones must have two entries");
        c.spatial_jones = {complex_of(jj[0], "spatial.jones[0]"), complex_of(jj[1], "spatial.jones[1]")};
      }
      c.spatial_phase0 = s.value("phase0", c.spatial_phase0);
    }
    if (j.contains("angular")) {
      const auto& a = j["angular"];
      reject_unknown(a, {"carrier_x_bins", "carrier_y_bins", "relative_polarization_deg", "min_carrier_separation_bins"},
                     "angular");
      if (a.contains("carrier_x_bins")) c.angular_carrier_x_bins = pair_of(a["carrier_x_bins"], "angular.carrier_x_bins");
      if (a.contains("carrier_y_bins")) c.angular_carrier_y_bins = pair_of(a["carrier_y_bins"], "angular.carrier_y_bins");
      c.relative_polarization_deg = a.value("relative_polarization_deg", c.relative_polarization_deg);
      c.min_carrier_separation_bins = a.value("min_carrier_separation_bins", c.min_carrier_separation_bins);
    }
    if (j.contains("reference_amplitude") && !j["reference_amplitude"].is_null())
      c.reference_amplitude = j["reference_amplitude"].get<double>();
    if (j.contains("camera")) {
      const auto& cam = j["camera"];
      reject_unknown(cam, {"bit_depth", "full_scale", "full_scale_headroom", "noise_sigma_fraction"}, "camera");
      c.bit_depth = cam.value("bit_depth", c.bit_depth);
      if (cam.contains("full_scale")) {
        const auto& f = cam["full_scale"];
        if (f.is_number()) c.full_scale = f.get<double>();
        else if (!(f.is_string() && f.get<std::string>() == "auto"))
          throw Error(Errc::Config, "camera.full_scale must be a number or \"auto\"");
      }
      c.full_scale_headroom = cam.value("full_scale_headroom", c.full_scale_headroom);
      c.noise_sigma_fraction = cam.value("noise_sigma_fraction", c.noise_sigma_fraction);
    }
    if (j.contains("basis")) {
      const auto& b = j["basis"];
      reject_unknown(b, {"waist", "center", "groups"}, "basis");
      if (b.contains("waist") && !b["waist"].is_null()) c.waist = b["waist"].get<double>();
      if (b.contains("center")) {
        const auto p = pair_of(b["center"], "basis.center");
        c.center_x = p[0];
        c.center_y = p[1];
      }
      c.groups = b.value("groups", c.groups);
    }
    if (j.contains("recon")) {
      const auto& r = j["recon"];
      reject_unknown(r, {"dc_exclusion_bins", "crop_radius_bins", "disambiguation", "use_configured_carrier",
                         "normalize_by_reference"},
                     "recon");
      if (r.contains("dc_exclusion_bins")) c.dc_exclusion_bins = r["dc_exclusion_bins"].get<double>();
      if (r.contains("crop_radius_bins")) c.crop_radius_bins = r["crop_radius_bins"].get<double>();
      c.disambiguation = r.value("disambiguation", c.disambiguation);
      c.use_configured_carrier = r.value("use_configured_carrier", c.use_configured_carrier);
      c.normalize_by_reference = r.value("normalize_by_reference", c.normalize_by_reference);
    }
    if (j.contains("device")) {
      const auto& d = j["device"];
      reject_unknown(d, {"truth_file", "generate"}, "device");
      if (d.contains("truth_file")) {
        fs::path p = d["truth_file"].get<std::string>();
        c.truth_file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
      }
      if (d.contains("generate")) {
        const auto& g = d["generate"];
        reject_unknown(g, {"ports", "mdl_db", "xt_db", "seed"}, "device.generate");
        c.generate.ports = g.value("ports", c.generate.ports);
        c.generate.mdl_db = g.value("mdl_db", c.generate.mdl_db);
        c.generate.xt_db = g.value("xt_db", c.generate.xt_db);
        c.generate.seed = g.value("seed", c.generate.seed);
      }
    }
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("in_dir")) c.in_dir = fs::path(j["in_dir"].get<std::string>());
  } catch (const json::exception& e) {
    throw Error(Errc::Config, std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error(Errc::Config, "config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::Config, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json config_to_json(const RunConfig& c) {
  json j;
  j["grid"] = {{"nx", c.nx}, {"ny", c.ny}, {"pitch", c.pitch}};
  j["wavelength"] = c.wavelength;
  j["scheme"] = c.scheme;
  j["seed"] = c.seed;
  json spatial = {{"jones", json::array({pair_json({c.spatial_jones[0].real(), c.spatial_jones[0].imag()}),
                                         pair_json({c.spatial_jones[1].real(), c.spatial_jones[1].imag()})})},
                  {"phase0", c.spatial_phase0}};
  if (c.spatial_carrier_bins) spatial["carrier_bins"] = pair_json(*c.spatial_carrier_bins);
  j["spatial"] = spatial;
  json angular = {{"relative_polarization_deg", c.relative_polarization_deg},
                  {"min_carrier_separation_bins", c.min_carrier_separation_bins}};
  if (c.angular_carrier_x_bins) angular["carrier_x_bins"] = pair_json(*c.angular_carrier_x_bins);
  if (c.angular_carrier_y_bins) angular["carrier_y_bins"] = pair_json(*c.angular_carrier_y_bins);
  j["angular"] = angular;
  j["reference_amplitude"] = c.reference_amplitude ? json(*c.reference_amplitude) : json(nullptr);
  j["camera"] = {{"bit_depth", c.bit_depth},
                 {"full_scale", c.full_scale ? json(*c.full_scale) : json("auto")},
                 {"full_scale_headroom", c.full_scale_headroom},
                 {"noise_sigma_fraction", c.noise_sigma_fraction}};
  j["basis"] = {{"waist", c.waist ? json(*c.waist) : json(nullptr)},
                {"center", json::array({c.center_x, c.center_y})},
                {"groups", c.groups}};
  json recon = {{"disambiguation", c.disambiguation},
                {"use_configured_carrier", c.use_configured_carrier},
                {"normalize_by_reference", c.normalize_by_reference}};
  if (c.dc_exclusion_bins) recon["dc_exclusion_bins"] = *c.dc_exclusion_bins;
  if (c.crop_radius_bins) recon["crop_radius_bins"] = *c.crop_radius_bins;
  j["recon"] = recon;
  json device = {{"generate", {{"ports", c.generate.ports}, {"mdl_db", c.generate.mdl_db},
                               {"xt_db", c.generate.xt_db}, {"seed", c.generate.seed}}}};
  if (c.truth_file) device["truth_file"] = c.truth_file->string();
  j["device"] = device;
  j["out_dir"] = c.out_dir.string();
  if (c.in_dir) j["in_dir"] = c.in_dir->string();
  return j;
}

}  // namespace holobench::io
