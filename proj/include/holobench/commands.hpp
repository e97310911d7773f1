#pragma once

#include <optional>
#include <vector>

#include "holobench/config.hpp"
#include "holobench/formats.hpp"
#include "holobench/report.hpp"

namespace holobench::io {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitPartial = 2, kExitIo = 3 };

int exit_code_for(Errc code);

/// Installs a stderr logger whose level comes from HOLOBENCH_LOG (default "warn").
void init_logging();

/// Truth matrix from `truth_file` when configured, else the generated device.
ComplexMatrix<double> resolve_truth(const RunConfig& config);
void write_truth(const fs::path& path, const ComplexMatrix<double>& truth);
ComplexMatrix<double> read_truth(const fs::path& path);

/// Schemes a command should run: the configured one, or both.
std::vector<Scheme> selected_schemes(const RunConfig& config);

/// Writes frames, manifest.json and truth.json for one scheme into `dir`.
json synth_to_dir(const RunConfig& config, Scheme scheme, const fs::path& dir);

struct ReconOutcome {
  int frames = 0;
  int failed = 0;  // frames flagged in sidebands.json, no field files written for them
};

/// Reconstructs every frame listed in `in/manifest.json` into field files under `out`.
/// Throws SchemeMismatch if `requested` disagrees with the scheme that recorded the frames.
ReconOutcome recon_dir(const RunConfig& config, const fs::path& in, const fs::path& out,
                       std::optional<Scheme> requested = std::nullopt);

/// Decomposes the fields listed in `in/fields.json`, writes report.json, report.txt and plots.
ReportFile analyze_dir(const RunConfig& config, const fs::path& in, const fs::path& out, bool plots = true);

struct PipelineResult {
  std::vector<ReportFile> reports;  // one per scheme, in run order
  SchemeMetrics truth;
  int failed_frames = 0;
};

/// synth, recon and analyze under out_dir/<scheme>/{frames,fields,analysis}, plus the
/// comparison table in out_dir when both schemes ran.
PipelineResult pipeline(const RunConfig& config);

int cmd_synth(const RunConfig& config);
int cmd_recon(const RunConfig& config);
int cmd_analyze(const RunConfig& config);
int cmd_pipeline(const RunConfig& config);

}  // namespace holobench::io
