#include "holobench/commands.hpp"

#include <cstdlib>
#include <future>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "holobench/plots.hpp"

namespace holobench::io {

namespace {

constexpr const char* kFrameManifest = "manifest.json";
constexpr const char* kFieldManifest = "fields.json";

void write_json(const fs::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::Format, path.string() + ": " + e.what());
  }
}

void log_diagnostics(const Diagnostics& diag, const std::string& where) {
  for (const auto& w : diag.items) spdlog::warn("{}: {}: {}", where, to_string(w.kind), w.message);
}

json diagnostics_json(const Diagnostics& diag) {
  json out = json::array();
  for (const auto& w : diag.items) out.push_back({{"kind", to_string(w.kind)}, {"message", w.message}});
  return out;
}

json pair_json(double a, double b) { return json::array({a, b}); }

json reference_json(const std::string& name, const ReferenceBeam<double>& beam, const Grid2Dd& grid,
                    double wavelength) {
  return {{"name", name},
          {"carrier", pair_json(beam.carrier.fx, beam.carrier.fy)},
          {"carrier_bins", pair_json(beam.carrier.bins_x(grid), beam.carrier.bins_y(grid))},
          {"tilt_rad", pair_json(std::asin(wavelength * beam.carrier.fx), std::asin(wavelength * beam.carrier.fy))},
          {"jones", json::array({pair_json(beam.jones(0).real(), beam.jones(0).imag()),
                                 pair_json(beam.jones(1).real(), beam.jones(1).imag())})},
          {"phase0", beam.phase0}};
}

Pol parse_pol(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "X") return Pol::X;
  if (s == "Y") return Pol::Y;
  throw Error(Errc::Format, "bad polarization \"" + s + "\"");
}

std::string pol_str(Pol p) { return std::string(1, pol_name(p)); }

bool is_per_frame_failure(Errc c) {
  return c == Errc::NoSideband || c == Errc::ConjugateAmbiguity || c == Errc::SidebandAssignmentAmbiguous;
}

/// Directories holding one scheme each: `dir` itself when it has `marker`, else its
/// spatial/ and angular/ children that do.
std::vector<fs::path> scheme_dirs(const fs::path& dir, const char* marker) {
  if (fs::exists(dir / marker)) return {dir};
  std::vector<fs::path> out;
  for (const char* s : {"spatial", "angular"})
    if (fs::exists(dir / s / marker)) out.push_back(dir / s);
  if (out.empty()) throw Error(Errc::Io, "no " + std::string(marker) + " in " + dir.string());
  return out;
}

fs::path input_dir(const RunConfig& c) {
  if (!c.in_dir) throw Error(Errc::Config, "this command needs an input directory (--in or \"in_dir\")");
  return *c.in_dir;
}

DeviceModeld make_device(const RunConfig& c, Scheme scheme, Diagnostics* diag) {
  const auto s = c.scheme_config(scheme);
  auto basis = build_lp_basis(s.signal_grid(c.frame_grid()), c.resolved_waist(), c.center_x, c.center_y, diag);
  basis = basis.with_groups(c.group_map(int(basis.size())));
  return DeviceModeld(resolve_truth(c), std::move(basis));
}

SchemeMetrics metrics_of(const std::string& scheme, const MetricsReportd& m) { return {scheme, m.xt_db, m.mdl_db}; }

}  // namespace

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::Io:
    case Errc::Format:
      return kExitIo;
    case Errc::NoSideband:
    case Errc::ConjugateAmbiguity:
    case Errc::SidebandAssignmentAmbiguous:
    case Errc::MissingInput:
      return kExitPartial;
    default:
      return kExitUsage;
  }
}

void init_logging() {
  auto logger = spdlog::stderr_color_mt("holobench");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("HOLOBENCH_LOG");
  const auto level = env ? spdlog::level::from_str(env) : spdlog::level::warn;
  spdlog::set_level(level);
}

void write_truth(const fs::path& path, const ComplexMatrix<double>& truth) {
  write_json(path, {{"format", "holobench-truth"}, {"version", 1}, {"matrix", matrix_to_json(truth)}});
}

ComplexMatrix<double> read_truth(const fs::path& path) {
  if (!fs::exists(path)) throw Error(Errc::Io, "truth matrix file not found: " + path.string());
  const auto j = read_json(path);
  try {
    return matrix_from_json(j.contains("matrix") ? j.at("matrix") : j);
  } catch (const json::exception& e) {
    throw Error(Errc::Format, path.string() + ": " + e.what());
  }
}

ComplexMatrix<double> resolve_truth(const RunConfig& c) {
  if (c.truth_file) return read_truth(*c.truth_file);
  return generate_device(c.generate, c.group_map(c.generate.ports)).truth;
}

std::vector<Scheme> selected_schemes(const RunConfig& c) {
  if (c.scheme == "both") return {Scheme::Spatial, Scheme::Angular};
  return {parse_scheme(c.scheme)};
}

json synth_to_dir(const RunConfig& c, Scheme scheme_kind, const fs::path& dir) {
  c.validate();
  Diagnostics diag;
  const auto scheme = c.scheme_config(scheme_kind);
  const auto device = make_device(c, scheme_kind, &diag);
  const auto frame_grid = c.frame_grid();
  const double full_scale = c.full_scale.value_or(c.full_scale_headroom * peak_intensity(device, scheme));
  const auto camera = c.camera(full_scale);

  spdlog::info("synth {}: {} ports, full scale {:.6g}", scheme_name(scheme_kind), device.port_count(), full_scale);
  const auto exposures = simulate_measurement(device, scheme, camera, &diag);
  log_diagnostics(diag, std::string(scheme_name(scheme_kind)));

  fs::create_directories(dir);
  json frames = json::array();
  for (const auto& e : exposures) {
    const auto name = frame_file_name(e.port, e.in_pol);
    write_pgm(dir / name, e.frame.codes);
    frames.push_back({{"file", name}, {"port", e.port}, {"in_pol", pol_str(e.in_pol)},
                      {"reference_amplitude", e.reference_amplitude}});
  }

  json refs = json::array();
  if (scheme_kind == Scheme::Spatial) {
    refs.push_back(reference_json("R", scheme.reference, scheme.signal_grid(frame_grid), c.wavelength));
  } else {
    refs.push_back(reference_json("R_X", scheme.reference_x, frame_grid, c.wavelength));
    refs.push_back(reference_json("R_Y", scheme.reference_y, frame_grid, c.wavelength));
  }
  const auto sg = scheme.signal_grid(frame_grid);
  const double ipc = exposures.empty() ? 0.0 : exposures.front().frame.intensity_per_code;

  RunConfig recorded = c;
  recorded.scheme = std::string(scheme_name(scheme_kind));
  recorded.full_scale = full_scale;

  json manifest = {
      {"format", "holobench-frames"},
      {"version", 1},
      {"scheme", scheme_name(scheme_kind)},
      {"grid", {{"nx", frame_grid.nx()}, {"ny", frame_grid.ny()}, {"pitch", frame_grid.pitch_x()}}},
      {"signal_grid", {{"nx", sg.nx()}, {"ny", sg.ny()}}},
      {"wavelength", c.wavelength},
      {"seed", c.seed},
      {"references", refs},
      {"camera",
       {{"bit_depth", camera.bit_depth},
        {"full_scale", full_scale},
        {"intensity_per_code", ipc},
        {"noise_sigma", camera.noise_sigma}}},
      {"basis", {{"waist", c.resolved_waist()}, {"center", pair_json(c.center_x, c.center_y)}, {"groups", c.groups}}},
      {"ports", device.port_count()},
      {"frames", frames},
      {"truth_file", "truth.json"},
      {"warnings", diagnostics_json(diag)},
      {"config", config_to_json(recorded)},
  };
  // Output locations do not describe the frames; keep them out so relocated runs compare equal.
  manifest["config"].erase("out_dir");
  manifest["config"].erase("in_dir");
  if (scheme_kind == Scheme::Angular) manifest["relative_polarization_deg"] = c.relative_polarization_deg;
  write_truth(dir / "truth.json", device.truth);
  write_json(dir / kFrameManifest, manifest);
  return manifest;
}

ReconOutcome recon_dir(const RunConfig& c, const fs::path& in, const fs::path& out, std::optional<Scheme> requested) {
  const auto manifest_path = in / kFrameManifest;
  if (!fs::exists(manifest_path)) throw Error(Errc::Io, "frame manifest not found: " + manifest_path.string());
  const auto manifest = read_json(manifest_path);

  Scheme recorded_scheme;
  RunConfig geometry;
  CameraFramed prototype{Grid2Dd(8, 8, 1.0), {}, 1.0, 12};
  std::vector<std::tuple<std::string, int, Pol, double>> frames;
  int ports = 0;
  try {
    recorded_scheme = parse_scheme(manifest.at("scheme").get<std::string>());
    geometry = config_from_json(manifest.at("config"));
    prototype.grid = geometry.frame_grid();
    prototype.intensity_per_code = manifest.at("camera").at("intensity_per_code").get<double>();
    prototype.bit_depth = manifest.at("camera").at("bit_depth").get<int>();
    ports = manifest.at("ports").get<int>();
    for (const auto& f : manifest.at("frames"))
      frames.emplace_back(f.at("file").get<std::string>(), f.at("port").get<int>(), parse_pol(f.at("in_pol")),
                          f.at("reference_amplitude").get<double>());
  } catch (const json::exception& e) {
    throw Error(Errc::Format, manifest_path.string() + ": " + e.what());
  }
  if (requested && *requested != recorded_scheme)
    throw Error(Errc::SchemeMismatch, "frames in " + in.string() + " were recorded with the " +
                                          std::string(scheme_name(recorded_scheme)) + " scheme, not " +
                                          std::string(scheme_name(*requested)));

  const auto scheme = geometry.scheme_config(recorded_scheme);
  const auto recon_base = c.recon_config();

  struct FrameResult {
    std::optional<Reconstruction<double>> recon;
    std::string error;
    Errc code = Errc::NoSideband;
    Diagnostics diag;
  };
  std::vector<std::future<FrameResult>> jobs;
  for (const auto& [file, port, pol, amplitude] : frames) {
    jobs.push_back(std::async(std::launch::async, [&, file = file, amplitude = amplitude] {
      FrameResult r;
      CameraFramed frame = prototype;
      frame.codes = read_pgm(in / file);
      if (frame.codes.rows() != frame.grid.ny() || frame.codes.cols() != frame.grid.nx())
        throw Error(Errc::Format, file + " does not match the manifest grid");
      auto rc = recon_base;
      if (c.normalize_by_reference) rc.reference_amplitude = amplitude;
      try {
        r.recon = reconstruct(frame, scheme, rc, &r.diag);
      } catch (const Error& e) {
        if (!is_per_frame_failure(e.code())) throw;
        r.error = e.what();
        r.code = e.code();
      }
      return r;
    }));
  }

  fs::create_directories(out);
  ReconOutcome outcome;
  json log = json::array();
  json fields = json::array();
  bool normalized = false;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto r = jobs[i].get();
    const auto& [file, port, pol, amplitude] = frames[i];
    ++outcome.frames;
    log_diagnostics(r.diag, file);
    json entry = {{"file", file}, {"port", port}, {"in_pol", pol_str(pol)}, {"warnings", diagnostics_json(r.diag)}};
    if (!r.recon) {
      ++outcome.failed;
      spdlog::error("{}: {}", file, r.error);
      entry["status"] = to_string(r.code);
      entry["message"] = r.error;
      log.push_back(entry);
      continue;
    }
    const auto& rec = *r.recon;
    normalized = rec.normalized;
    entry["status"] = "ok";
    json detected = json::array();
    for (const auto& s : rec.detected)
      detected.push_back({{"carrier", pair_json(s.carrier.fx, s.carrier.fy)},
                          {"bin", json::array({s.bin_x, s.bin_y})},
                          {"peak_magnitude", s.peak_magnitude},
                          {"expected_index", s.expected_index}});
    entry["detected"] = detected;
    entry["used_carriers"] = {{"X", pair_json(rec.used[0].fx, rec.used[0].fy)},
                              {"Y", pair_json(rec.used[1].fx, rec.used[1].fy)}};
    log.push_back(entry);
    for (Pol out_pol : {Pol::X, Pol::Y}) {
      const auto name = field_file_name(port, pol, out_pol);
      write_field(out / name, rec.field[out_pol]);
      fields.push_back({{"file", name}, {"port", port}, {"in_pol", pol_str(pol)}, {"out_pol", pol_str(out_pol)}});
    }
  }

  write_json(out / "sidebands.json", {{"format", "holobench-sidebands"}, {"version", 1}, {"frames", log}});
  write_json(out / kFieldManifest, {{"format", "holobench-fields"},
                                    {"version", 1},
                                    {"scheme", scheme_name(recorded_scheme)},
                                    {"normalized", normalized},
                                    {"ports", ports},
                                    {"basis", manifest.at("basis")},
                                    {"failed_frames", outcome.failed},
                                    {"fields", fields}});
  spdlog::info("recon {}: {} frames, {} flagged", scheme_name(recorded_scheme), outcome.frames, outcome.failed);
  return outcome;
}

ReportFile analyze_dir(const RunConfig& c, const fs::path& in, const fs::path& out, bool plots) {
  const auto manifest_path = in / kFieldManifest;
  if (!fs::exists(manifest_path)) throw Error(Errc::Io, "field manifest not found: " + manifest_path.string());
  const auto manifest = read_json(manifest_path);

  std::string scheme;
  int ports = 0;
  double waist = c.resolved_waist(), cx = c.center_x, cy = c.center_y;
  try {
    scheme = manifest.at("scheme").get<std::string>();
    ports = manifest.at("ports").get<int>();
    // The basis recorded at synthesis wins unless the config names one explicitly.
    if (!c.waist && manifest.contains("basis")) {
      const auto& b = manifest["basis"];
      waist = b.at("waist").get<double>();
      cx = b.at("center")[0].get<double>();
      cy = b.at("center")[1].get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(Errc::Format, manifest_path.string() + ": " + e.what());
  }

  std::optional<ModeBasis<double>> basis;
  std::vector<InputMeasurement<double>> measurements;
  fs::create_directories(out);
  for (int port = 0; port < ports; ++port)
    for (Pol in_pol : {Pol::X, Pol::Y}) {
      const auto fx = in / field_file_name(port, in_pol, Pol::X);
      const auto fy = in / field_file_name(port, in_pol, Pol::Y);
      if (!fs::exists(fx) || !fs::exists(fy)) {
        spdlog::error("missing field files for port {} input {}", port, pol_name(in_pol));
        continue;
      }
      const auto ex = read_field(fx);
      const auto ey = read_field(fy);
      if (!basis) {
        Diagnostics diag;
        basis = build_lp_basis(ex.grid(), waist, cx, cy, &diag);
        basis = basis->with_groups(c.group_map(int(basis->size())));
        log_diagnostics(diag, "basis");
      }
      measurements.push_back({port, in_pol, decompose(ex, *basis).coefficients, decompose(ey, *basis).coefficients});
      if (plots) {
        for (auto [pol, field] : {std::pair{Pol::X, &ex}, std::pair{Pol::Y, &ey}}) {
          const auto stem = fs::path(field_file_name(port, in_pol, pol)).stem().string();
          write_amplitude_ppm(out / (stem + "_amp.ppm"), *field);
          write_phase_ppm(out / (stem + "_phase.ppm"), *field);
        }
      }
    }
  if (!basis) throw Error(Errc::MissingInput, "no field files found in " + in.string());

  ReportFile report;
  report.scheme = scheme;
  report.transfer = assemble_matrix(measurements, basis->labels(), ports);
  report.metrics = analyze(report.transfer, basis->groups(), basis->labels());
  write_json(out / "report.json", report_to_json(report));
  write_atomic(out / "report.txt", report_summary(report));
  if (plots) write_power_heatmap(out / "power_matrix.ppm", report.metrics.power);
  spdlog::info("analyze {}: XT {} dB, MDL {} dB", scheme, format_db(report.metrics.xt_db),
               format_db(report.metrics.mdl_db));
  return report;
}

PipelineResult pipeline(const RunConfig& c) {
  c.validate();
  PipelineResult result;
  const auto truth = resolve_truth(c);
  {
    TransferMatrixd t;
    t.entries = truth;
    t.modes = int(truth.rows() / 2);
    t.ports = int(truth.cols() / 2);
    std::vector<std::string> labels{"LP01", "LP11a", "LP11b"};
    labels.resize(std::size_t(t.modes));
    result.truth = metrics_of("truth", analyze(t, c.group_map(t.modes), labels));
  }
  const auto schemes = selected_schemes(c);
  for (Scheme s : schemes) {
    const auto root = c.out_dir / std::string(scheme_name(s));
    synth_to_dir(c, s, root / "frames");
    const auto rec = recon_dir(c, root / "frames", root / "fields", s);
    result.failed_frames += rec.failed;
    result.reports.push_back(analyze_dir(c, root / "fields", root / "analysis"));
  }
  if (schemes.size() == 2) {
    Comparison cmp;
    cmp.truth = result.truth;
    cmp.spatial = metrics_of("spatial", result.reports[0].metrics);
    cmp.angular = metrics_of("angular", result.reports[1].metrics);
    write_json(c.out_dir / "comparison.json", comparison_to_json(cmp));
    write_atomic(c.out_dir / "comparison.txt", comparison_summary(cmp));
  }
  return result;
}

int cmd_synth(const RunConfig& c) {
  const auto schemes = selected_schemes(c);
  for (Scheme s : schemes) {
    const auto dir = schemes.size() == 1 ? c.out_dir : c.out_dir / std::string(scheme_name(s));
    const auto m = synth_to_dir(c, s, dir);
    std::printf("%s: wrote %zu frames to %s\n", std::string(scheme_name(s)).c_str(), m["frames"].size(),
                dir.string().c_str());
  }
  return kExitOk;
}

int cmd_recon(const RunConfig& c) {
  const auto in = input_dir(c);
  std::optional<Scheme> requested;
  if (c.scheme != "both") requested = parse_scheme(c.scheme);
  const auto dirs = scheme_dirs(in, kFrameManifest);
  int failed = 0;
  for (const auto& d : dirs) {
    const auto out = dirs.size() == 1 ? c.out_dir : c.out_dir / d.filename();
    const auto r = recon_dir(c, d, out, requested);
    failed += r.failed;
    std::printf("%s: %d frames, %d reconstructed, %d flagged -> %s\n", d.string().c_str(), r.frames,
                r.frames - r.failed, r.failed, out.string().c_str());
  }
  return failed ? kExitPartial : kExitOk;
}

int cmd_analyze(const RunConfig& c) {
  const auto in = input_dir(c);
  const auto dirs = scheme_dirs(in, kFieldManifest);
  for (const auto& d : dirs) {
    const auto out = dirs.size() == 1 ? c.out_dir : c.out_dir / d.filename();
    const auto report = analyze_dir(c, d, out);
    std::fputs(report_summary(report).c_str(), stdout);
  }
  return kExitOk;
}

int cmd_pipeline(const RunConfig& c) {
  const auto r = pipeline(c);
  if (r.reports.size() == 2) {
    Comparison cmp;
    cmp.truth = r.truth;
    cmp.spatial = metrics_of("spatial", r.reports[0].metrics);
    cmp.angular = metrics_of("angular", r.reports[1].metrics);
    std::fputs(comparison_summary(cmp).c_str(), stdout);
  } else {
    for (const auto& rep : r.reports) std::fputs(report_summary(rep).c_str(), stdout);
  }
  return r.failed_frames ? kExitPartial : kExitOk;
}

}  // namespace holobench::io
