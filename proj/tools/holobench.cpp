// holobench: simulate and reconstruct polarization-diverse off-axis holograms.
//
//   holobench synth|recon|analyze|pipeline --config <file> [--seed N] [--scheme spatial|angular]
//                                          [--out DIR] [--in DIR]

#include <cstdio>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "holobench/commands.hpp"

namespace io = holobench::io;

int main(int argc, char** argv) {
  CLI::App app{"Polarization-diverse off-axis digital holography bench"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scheme;
  std::optional<std::string> out_dir;
  std::optional<std::string> in_dir;

  auto add_common = [&](CLI::App* sub, bool takes_input) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "Camera noise seed override");
    sub->add_option("--scheme", scheme, "Restrict to one multiplexing scheme")
        ->check(CLI::IsMember({"spatial", "angular"}));
    sub->add_option("--out", out_dir, "Output directory");
    if (takes_input) sub->add_option("--in", in_dir, "Input directory");
  };
  auto* synth = app.add_subcommand("synth", "Render camera frames for a device");
  auto* recon = app.add_subcommand("recon", "Reconstruct complex fields from frames");
  auto* analyze = app.add_subcommand("analyze", "Transfer matrix, crosstalk and MDL from fields");
  auto* pipeline = app.add_subcommand("pipeline", "synth, recon and analyze, comparing schemes");
  add_common(synth, false);
  add_common(recon, true);
  add_common(analyze, true);
  add_common(pipeline, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? io::kExitOk : io::kExitUsage;
  }

  io::init_logging();
  try {
    auto config = io::load_config(config_path);
    if (seed) config.seed = *seed;
    if (scheme) config.scheme = *scheme;
    if (out_dir) config.out_dir = *out_dir;
    if (in_dir) config.in_dir = io::fs::path(*in_dir);
    config.validate();

    if (synth->parsed()) return io::cmd_synth(config);
    if (recon->parsed()) return io::cmd_recon(config);
    if (analyze->parsed()) return io::cmd_analyze(config);
    return io::cmd_pipeline(config);
  } catch (const holobench::Error& e) {
    spdlog::error("{}", e.what());
    return io::exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("Io: {}", e.what());
    return io::kExitIo;
  }
}
