#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "svim/error.hpp"
#include "svim/tacheometry.hpp"
#include "svim/triangulation.hpp"
#include "svim/width.hpp"

namespace svim::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kExitOk = 0,
  kExitSchema = 2,
  kExitDegenerate = 3,
  kExitIo = 4,
};

/// Exit code for a library error category.
int exit_code_for(ErrorCode code);

struct RunSummary {
  std::size_t items = 0;
  std::size_t failed = 0;
  std::vector<std::string> warnings;

  int exit_code() const { return items > 0 && failed == items ? kExitDegenerate : kExitOk; }
};

struct WidthOptions {
  std::vector<fs::path> rasters;
  fs::path output;
  WidthConfig config;
  int jobs = 1;
};

struct LocalizeOptions {
  fs::path panos;
  fs::path detections;
  std::optional<fs::path> registry;
  fs::path output;
  double min_angular_height_deg = kDefaultMinAngularHeightDeg;
  int jobs = 1;
};

struct MergeOptions {
  fs::path input;
  fs::path output;
  double radius_m = kDefaultMergeRadiusM;
};

struct PairOptions {
  fs::path panos;
  fs::path observations;
  fs::path output;
  double match_distance_m = kDefaultMatchDistanceM;
  ThumbnailLayout layout;
  int jobs = 1;
};

struct DiameterOptions {
  PairOptions pairing;
  DiameterMode mode = DiameterMode::Tangent;
  double min_theta_c_deg = kDefaultMinThetaCDeg;
  double tree_radius_m = kDefaultMatchDistanceM;
};

struct SynthOptions {
  fs::path scene;
  fs::path out_dir;
};

RunSummary run_width(const WidthOptions& opts);
RunSummary run_localize(const LocalizeOptions& opts);
RunSummary run_merge(const MergeOptions& opts);
RunSummary run_pair(const PairOptions& opts);
RunSummary run_diameter(const DiameterOptions& opts);
RunSummary run_synth(const SynthOptions& opts);

}  // namespace svim::cli
