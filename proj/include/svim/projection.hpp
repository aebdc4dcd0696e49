#pragma once

#include <optional>
#include <string>
#include <variant>

#include "svim/geo.hpp"

namespace svim {

/// World-frame viewing direction.
struct AngularObservation {
  double azimuth = 0.0;   // clockwise from true north, [0, 360)
  double altitude = 0.0;  // above horizontal, [-90, 90]
};

/// Perspective image reprojected from a panorama. Orientation is world-referenced:
/// yaw = pose heading + heading_offset, pitch as given, no roll.
struct ThumbnailSpec {
  std::string pano_id;
  double heading_offset = 0.0;
  double pitch = 0.0;
  double hfov = 90.0;
  int width = 0;
  int height = 0;

  bool operator==(const ThumbnailSpec&) const = default;
};

/// Tag for the full equirectangular panorama of a pose.
struct PanoramaImage {
  bool operator==(const PanoramaImage&) const = default;
};

using ImageSource = std::variant<PanoramaImage, ThumbnailSpec>;

/// Continuous pixel coordinates; integer values are pixel centers.
struct PixelCoord {
  double col = 0.0;
  double row = 0.0;
};

struct PixelBox {
  std::string image_id;
  int col_min = 0;
  int row_min = 0;
  int col_max = 0;
  int row_max = 0;

  bool operator==(const PixelBox&) const = default;
};

struct AngularExtents {
  double theta_top = 0.0;     // altitude of the top edge
  double theta_bottom = 0.0;  // altitude of the bottom edge
  double az_center = 0.0;
  double hfov_box = 0.0;      // azimuth span of the box at its center row
};

void validate(const ThumbnailSpec& spec);

AngularObservation pano_pixel_to_angles(const PanoramaPose& pose, double col, double row);
/// Inverse of pano_pixel_to_angles. Column wraps into [-0.5, width - 0.5).
PixelCoord angles_to_pano_pixel(const PanoramaPose& pose, const AngularObservation& obs);

double thumbnail_focal_px(const ThumbnailSpec& spec);
AngularObservation thumb_pixel_to_angles(const PanoramaPose& pose, const ThumbnailSpec& spec,
                                         double col, double row);
/// std::nullopt when the ray misses the thumbnail frustum.
std::optional<PixelCoord> angles_to_thumb_pixel(const PanoramaPose& pose, const ThumbnailSpec& spec,
                                                const AngularObservation& obs);

AngularObservation pixel_to_angles(const PanoramaPose& pose, const ImageSource& image, double col,
                                   double row);

AngularExtents box_to_angular_extents(const PanoramaPose& pose, const ImageSource& image,
                                      const PixelBox& box);

/// Angular size of one pixel near the image center along the vertical axis.
double vertical_pixel_angle(const PanoramaPose& pose, const ImageSource& image);

}  // namespace svim
