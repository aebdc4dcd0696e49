#include <CLI11.hpp>

#include <iostream>

#include "svim/commands.hpp"
#include "svim/error.hpp"

namespace {

int report(const svim::cli::RunSummary& summary) {
  for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
  if (summary.failed > 0) {
    std::cerr << summary.failed << " of " << summary.items << " items failed\n";
  }
  return summary.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace svim::cli;

  CLI::App app{"Street-view measurement pipelines: widths, tacheometric localization, stereo diameters"};
  app.set_config("--config", "", "INI/TOML file with default flag values");
  app.require_subcommand(1);
  int jobs = 1;
  app.add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  WidthOptions width;
  std::vector<std::string> allowed;
  double min_length = -1.0;
  double max_length = -1.0;
  auto* width_cmd = app.add_subcommand("width", "Measure ribbon widths on land-cover rasters");
  width_cmd->add_option("rasters", width.rasters, "Class rasters (PGM/PNG) with .json sidecars")
      ->required();
  width_cmd->add_option("-o,--output", width.output, "GeoJSON output")->required();
  width_cmd->add_option("--target-class", width.config.target_class)->capture_default_str();
  width_cmd->add_option("--interval-m", width.config.interval_m)->capture_default_str();
  width_cmd->add_option("--kernel-px", width.config.kernel_px)->capture_default_str();
  width_cmd->add_option("--min-cover-ratio", width.config.filter.min_cover_ratio)->capture_default_str();
  width_cmd->add_option("--allow-touching", allowed, "Replaces the default touching-class allow-list");
  width_cmd->add_option("--min-length-m", min_length);
  width_cmd->add_option("--max-length-m", max_length);

  LocalizeOptions localize;
  std::string registry;
  auto* loc_cmd = app.add_subcommand("localize", "Tacheometric localization of known-height detections");
  loc_cmd->add_option("--panos", localize.panos, "Panorama metadata JSONL")->required();
  loc_cmd->add_option("--detections", localize.detections)->required();
  loc_cmd->add_option("--registry", registry, "Known-dimension registry JSON");
  loc_cmd->add_option("-o,--output", localize.output)->required();
  loc_cmd->add_option("--min-angular-height-deg", localize.min_angular_height_deg)->capture_default_str();

  MergeOptions merge;
  auto* merge_cmd = app.add_subcommand("merge", "Cluster repeated localizations of the same object");
  merge_cmd->add_option("input", merge.input, "GeoJSON from `localize`")->required();
  merge_cmd->add_option("-o,--output", merge.output)->required();
  merge_cmd->add_option("--radius-m", merge.radius_m)->capture_default_str();

  auto add_pairing = [](CLI::App* cmd, PairOptions& p) {
    cmd->add_option("--panos", p.panos)->required();
    cmd->add_option("--observations", p.observations, "Trunk observations JSONL")->required();
    cmd->add_option("-o,--output", p.output)->required();
    cmd->add_option("--match-distance-m", p.match_distance_m)->capture_default_str();
    cmd->add_option("--thumb-width", p.layout.width)->capture_default_str();
    cmd->add_option("--thumb-height", p.layout.height)->capture_default_str();
    cmd->add_option("--thumb-hfov-deg", p.layout.hfov)->capture_default_str();
    cmd->add_option("--thumb-pitch-deg", p.layout.pitch)->capture_default_str();
  };

  PairOptions pair;
  auto* pair_cmd = app.add_subcommand("pair", "Form stereo pairs from adjacent panoramas");
  add_pairing(pair_cmd, pair);

  DiameterOptions diameter;
  bool exact = false;
  auto* dia_cmd = app.add_subcommand("diameter", "Triangulate trunks and measure diameters");
  add_pairing(dia_cmd, diameter.pairing);
  dia_cmd->add_flag("--exact-cylinder", exact, "Use the exact tangent geometry instead of 2 s tan(theta/2)");
  dia_cmd->add_option("--min-theta-c-deg", diameter.min_theta_c_deg)->capture_default_str();
  dia_cmd->add_option("--tree-radius-m", diameter.tree_radius_m)->capture_default_str();

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate oracle inputs from a scene description");
  synth_cmd->add_option("scene", synth.scene, "Scene JSON")->required();
  synth_cmd->add_option("-o,--out-dir", synth.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every other usage problem is a config error.
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitSchema;
  }

  try {
    if (width_cmd->parsed()) {
      width.jobs = jobs;
      if (!allowed.empty()) width.config.filter.allowed_touching = {allowed.begin(), allowed.end()};
      if (min_length >= 0.0) width.config.filter.min_length_m = min_length;
      if (max_length >= 0.0) width.config.filter.max_length_m = max_length;
      return report(run_width(width));
    }
    if (loc_cmd->parsed()) {
      localize.jobs = jobs;
      if (!registry.empty()) localize.registry = registry;
      return report(run_localize(localize));
    }
    if (merge_cmd->parsed()) return report(run_merge(merge));
    if (pair_cmd->parsed()) {
      pair.jobs = jobs;
      return report(run_pair(pair));
    }
    if (dia_cmd->parsed()) {
      diameter.pairing.jobs = jobs;
      diameter.mode = exact ? svim::DiameterMode::ExactCylinder : svim::DiameterMode::Tangent;
      return report(run_diameter(diameter));
    }
    if (synth_cmd->parsed()) return report(run_synth(synth));
  } catch (const svim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return 0;
}
