#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "svim/geo.hpp"
#include "svim/raster.hpp"

namespace svim {

/// Class ID marking pixels outside the source footprint after rotation. Reserved.
inline constexpr std::uint8_t kNoDataClass = 255;
/// Touching-class name for runs that end at the raster border or on no-data.
inline constexpr const char* kEdgeClass = "edge";

/// Georeferenced class grid. The grid is north-up; `heading` is the direction
/// (clockwise from north) that should point up before scanlines are cut.
struct LandCoverRaster {
  ClassRaster grid;
  double resolution = 0.0;  // meters per pixel
  GeoPoint center;
  double heading = 0.0;
  std::map<std::uint8_t, std::string> class_table;
};

void validate(const LandCoverRaster& raster);
std::uint8_t class_id(const LandCoverRaster& raster, const std::string& name);

/// Point in pixel edge coordinates: x to the right, y down, origin at the top-left corner.
struct RasterPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Affine map between the source raster and its heading-up rotation.
class RotationTransform {
 public:
  RotationTransform() = default;
  RotationTransform(double heading, int src_width, int src_height);

  int rotated_width() const { return dst_w_; }
  int rotated_height() const { return dst_h_; }
  double heading() const { return heading_; }

  RasterPoint to_rotated(const RasterPoint& src) const;
  RasterPoint to_source(const RasterPoint& dst) const;

 private:
  double heading_ = 0.0;
  double cos_ = 1.0;
  double sin_ = 0.0;
  int src_w_ = 0;
  int src_h_ = 0;
  int dst_w_ = 0;
  int dst_h_ = 0;
};

struct RotatedRaster {
  ClassRaster grid;
  RotationTransform transform;
};

/// Nearest-neighbor rotation onto an enlarged canvas; uncovered pixels get kNoDataClass.
RotatedRaster rotate_to_heading(const LandCoverRaster& raster);

BinaryRaster binarize(const ClassRaster& grid, std::uint8_t target);
BinaryRaster binarize(const ClassRaster& grid, const LandCoverRaster& raster, const std::string& target_class);

/// Square-kernel erosion/dilation; the window is clipped at the raster border.
BinaryRaster erode(const BinaryRaster& b, int kernel_px);
BinaryRaster dilate(const BinaryRaster& b, int kernel_px);
/// Opening followed by closing. kernel_px must be odd; 1 is the identity.
BinaryRaster morph_open_close(const BinaryRaster& b, int kernel_px);

struct Run {
  int row = 0;
  int col_start = 0;
  int col_end = 0;  // inclusive

  int length_px() const { return col_end - col_start + 1; }
  bool operator==(const Run&) const = default;
};

int scanline_stride(double interval_m, double resolution);
std::vector<Run> scanline_slices(const BinaryRaster& b, double interval_m, double resolution);

struct SliceAttributes {
  std::string touching_start;
  std::string touching_end;
  double cover_ratio = 0.0;
};

/// Touching classes come from the pixels just outside the run; cover_ratio counts
/// `target` pixels in the run-length square centered on the run.
SliceAttributes slice_attributes(const Run& run, const ClassRaster& rotated, std::uint8_t target,
                                 const std::map<std::uint8_t, std::string>& class_table);

struct SliceFilter {
  std::set<std::string> allowed_touching{"terrain", "sidewalk", "curb", "grass", "vegetation",
                                         "building", "parking"};
  double min_cover_ratio = 0.9;  // strict: cover_ratio must exceed it
  std::optional<double> min_length_m;
  std::optional<double> max_length_m;
};

struct Slice {
  LocalPoint start;  // meters from the raster center
  LocalPoint end;
  GeoPoint start_geo;
  GeoPoint end_geo;
  double length = 0.0;
  int row_index = 0;
  std::string touching_start;
  std::string touching_end;
  double cover_ratio = 0.0;
  bool valid = false;
};

struct RunWithAttributes {
  Run run;
  SliceAttributes attrs;
};

/// Maps runs back to the source frame and applies the filter. The target class
/// is always accepted as a touching class.
std::vector<Slice> finalize_slices(const std::vector<RunWithAttributes>& runs,
                                   const RotationTransform& transform, const LandCoverRaster& raster,
                                   const std::string& target_class, const SliceFilter& filter);

struct WidthConfig {
  std::string target_class = "road";
  double interval_m = 0.25;
  int kernel_px = 3;
  SliceFilter filter;
};

/// Full pipeline: rotate, binarize, open-close, scan, attribute, re-rotate.
/// Throws ErrorCode::Config for values no raster could satisfy.
void validate(const WidthConfig& config);

std::vector<Slice> measure_widths(const LandCoverRaster& raster, const WidthConfig& config);

}  // namespace svim
