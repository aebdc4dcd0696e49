#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svim/geo.hpp"
#include "svim/projection.hpp"
#include "svim/synthetic.hpp"
#include "svim/tacheometry.hpp"
#include "svim/triangulation.hpp"
#include "svim/width.hpp"

namespace svim::io {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "svim 0.3.0";

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);
/// Hex SHA-256 of the file contents.
std::string sha256_file(const fs::path& path);

/// Splits JSONL text (or a single top-level array) into records. Blank lines are skipped.
std::vector<json> parse_records(const std::string& text, const std::string& source);

// --- panorama metadata -------------------------------------------------------

PanoramaPose pose_from_json(const json& j, std::vector<std::string>* warnings = nullptr);
json pose_to_json(const PanoramaPose& pose);
/// Validated poses in file order. Missing seq_index values are assigned by file
/// order within each sequence_id.
std::vector<PanoramaPose> parse_pano_metadata(const std::string& text, const std::string& source,
                                              std::vector<std::string>* warnings = nullptr);
std::vector<PanoramaPose> load_pano_metadata(const fs::path& path,
                                             std::vector<std::string>* warnings = nullptr);
void write_pano_metadata(const std::vector<PanoramaPose>& poses, const fs::path& path);

// --- thumbnails, detections, observations -------------------------------------

ThumbnailSpec thumbnail_from_json(const json& j);
json thumbnail_to_json(const ThumbnailSpec& spec);

struct DetectionRecord {
  std::string pano_id;
  Detection detection;
};

DetectionRecord detection_from_json(const json& j);
json detection_to_json(const std::string& pano_id, const Detection& detection);
std::vector<DetectionRecord> load_detections(const fs::path& path);

/// Observation as stored: angles, pixel columns, or a mask image.
struct ObservationRecord {
  std::string pano_id;
  ThumbnailSpec thumbnail;
  std::optional<double> az_left_deg;
  std::optional<double> az_right_deg;
  std::optional<double> col_left;
  std::optional<double> col_right;
  std::optional<double> row_measure;
  std::optional<fs::path> mask_path;
  std::optional<double> depth_m;
};

ObservationRecord observation_from_json(const json& j, const fs::path& base_dir = {});
json observation_to_json(const TrunkObservation& obs);
std::vector<ObservationRecord> load_observations(const fs::path& path);
/// Converts pixel or mask inputs through the thumbnail projection.
TrunkObservation resolve_observation(const ObservationRecord& rec, const PanoramaPose& pose);

/// Picks the median-width row of a single-component trunk mask and converts its
/// pixel edges to world azimuths.
TrunkObservation mask_to_trunk_observation(const BinaryRaster& mask, const ThumbnailSpec& spec,
                                           const PanoramaPose& pose);

// --- rasters ------------------------------------------------------------------

/// 8-bit single-band PGM (P2/P5) or PNG.
ClassRaster read_class_raster(const fs::path& path);
void write_pgm(const ClassRaster& raster, const fs::path& path);

LandCoverRaster landcover_from_sidecar(ClassRaster grid, const json& sidecar);
json landcover_sidecar(const LandCoverRaster& raster);
/// Reads `<stem>.json` next to the raster unless a sidecar path is given.
LandCoverRaster load_landcover(const fs::path& raster_path, const fs::path& sidecar_path = {});
void write_landcover(const LandCoverRaster& raster, const fs::path& raster_path);

// --- registry and scenes ------------------------------------------------------

/// Default registry with the file's entries layered on top.
DimensionRegistry load_registry(const fs::path& path);
SceneSpec scene_from_json(const json& j);
SceneSpec load_scene(const fs::path& path);

// --- GeoJSON ------------------------------------------------------------------

struct Feature {
  std::string source_id;
  std::size_t index = 0;
  json geometry;
  json properties;
};

json point_geometry(const GeoPoint& p);
json line_geometry(const std::vector<GeoPoint>& points);

Feature slice_feature(const Slice& slice, const std::string& source_raster, std::size_t index);
Feature located_feature(const LocatedObject& obj, std::size_t index);
LocatedObject located_from_feature(const json& feature);
Feature tree_feature(const TriangulatedTree& tree, std::size_t index);

/// RFC 7946 FeatureCollection with features sorted by (source_id, index) and a
/// `metadata` foreign member.
json feature_collection(std::vector<Feature> features, const json& metadata);
void write_geojson(std::vector<Feature> features, const json& metadata, const fs::path& path);

json run_metadata(const json& resolved_config, const std::vector<fs::path>& inputs);

/// Formats a JSON document the same way every time.
std::string dump(const json& j);

}  // namespace svim::io
