#include "svim/projection.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "svim/error.hpp"

namespace svim {
namespace {

// Camera frame: x right, y forward, z up.
using Vec3 = std::array<double, 3>;

Vec3 direction(double yaw_deg, double alt_deg) {
  const double yaw = deg2rad(yaw_deg);
  const double alt = deg2rad(alt_deg);
  return {std::sin(yaw) * std::cos(alt), std::cos(yaw) * std::cos(alt), std::sin(alt)};
}

AngularObservation to_angles(const Vec3& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  const double z = std::clamp(v[2] / n, -1.0, 1.0);
  AngularObservation obs;
  obs.altitude = rad2deg(std::asin(z));
  obs.azimuth = normalize_deg(rad2deg(std::atan2(v[0], v[1])));
  return obs;
}

// Positive pitch raises the forward axis.
Vec3 rotate_pitch(const Vec3& v, double pitch_deg) {
  const double c = std::cos(deg2rad(pitch_deg));
  const double s = std::sin(deg2rad(pitch_deg));
  return {v[0], c * v[1] - s * v[2], s * v[1] + c * v[2]};
}

// Positive roll lowers the right axis.
Vec3 rotate_roll(const Vec3& v, double roll_deg) {
  const double c = std::cos(deg2rad(roll_deg));
  const double s = std::sin(deg2rad(roll_deg));
  return {c * v[0] + s * v[2], v[1], -s * v[0] + c * v[2]};
}

// Rotation about up by yaw, clockwise seen from above.
Vec3 rotate_yaw(const Vec3& v, double yaw_deg) {
  const double c = std::cos(deg2rad(yaw_deg));
  const double s = std::sin(deg2rad(yaw_deg));
  return {c * v[0] + s * v[1], -s * v[0] + c * v[1], v[2]};
}

Vec3 camera_to_world(const Vec3& v, double yaw, double pitch, double roll) {
  return rotate_yaw(rotate_pitch(rotate_roll(v, roll), pitch), yaw);
}

Vec3 world_to_camera(const Vec3& v, double yaw, double pitch, double roll) {
  return rotate_roll(rotate_pitch(rotate_yaw(v, -yaw), -pitch), -roll);
}

void check_pose_image(const PanoramaPose& pose) {
  if (pose.image_width <= 0 || pose.image_height <= 0) {
    throw Error(ErrorCode::InvalidSpec, "panorama '" + pose.pano_id + "' has no image dimensions");
  }
}

}  // namespace

void validate(const ThumbnailSpec& spec) {
  if (!(spec.hfov > 0.0 && spec.hfov < 180.0)) {
    throw Error(ErrorCode::InvalidSpec, "thumbnail hfov " + std::to_string(spec.hfov) + " not in (0, 180)");
  }
  if (spec.width <= 0 || spec.height <= 0) {
    throw Error(ErrorCode::InvalidSpec, "thumbnail dimensions must be positive");
  }
}

AngularObservation pano_pixel_to_angles(const PanoramaPose& pose, double col, double row) {
  check_pose_image(pose);
  const double w = pose.image_width;
  const double h = pose.image_height;
  if (!(col >= -0.5 && col <= w - 0.5 && row >= -0.5 && row <= h - 0.5)) {
    throw Error(ErrorCode::Range, "panorama pixel (" + std::to_string(col) + ", " +
                                      std::to_string(row) + ") outside image");
  }
  const double rel_az = (col + 0.5) / w * 360.0 - 180.0;
  const double alt = 90.0 - (row + 0.5) / h * 180.0;
  if (pose.pitch == 0.0 && pose.roll == 0.0) {
    return AngularObservation{normalize_deg(pose.heading + rel_az), alt};
  }
  return to_angles(camera_to_world(direction(rel_az, alt), pose.heading, pose.pitch, pose.roll));
}

PixelCoord angles_to_pano_pixel(const PanoramaPose& pose, const AngularObservation& obs) {
  check_pose_image(pose);
  double rel_az = obs.azimuth - pose.heading;
  double alt = obs.altitude;
  if (pose.pitch != 0.0 || pose.roll != 0.0) {
    const AngularObservation cam = to_angles(
        world_to_camera(direction(obs.azimuth, obs.altitude), pose.heading, pose.pitch, pose.roll));
    rel_az = cam.azimuth;
    alt = cam.altitude;
  }
  const double w = pose.image_width;
  const double h = pose.image_height;
  // Edge coordinate u in [0, w): column 0 starts at heading - 180.
  double u = normalize_deg(rel_az + 180.0) / 360.0 * w;
  if (u >= w) u -= w;
  const double v = (90.0 - alt) / 180.0 * h;
  return PixelCoord{u - 0.5, v - 0.5};
}

double thumbnail_focal_px(const ThumbnailSpec& spec) {
  validate(spec);
  return (spec.width / 2.0) / std::tan(deg2rad(spec.hfov / 2.0));
}

AngularObservation thumb_pixel_to_angles(const PanoramaPose& pose, const ThumbnailSpec& spec,
                                         double col, double row) {
  const double f = thumbnail_focal_px(spec);
  if (!(col >= -0.5 && col <= spec.width - 0.5 && row >= -0.5 && row <= spec.height - 0.5)) {
    throw Error(ErrorCode::Range, "thumbnail pixel (" + std::to_string(col) + ", " +
                                      std::to_string(row) + ") outside image");
  }
  const double x = col + 0.5 - spec.width / 2.0;
  const double y = row + 0.5 - spec.height / 2.0;
  const Vec3 cam{x, f, -y};
  return to_angles(camera_to_world(cam, pose.heading + spec.heading_offset, spec.pitch, 0.0));
}

std::optional<PixelCoord> angles_to_thumb_pixel(const PanoramaPose& pose, const ThumbnailSpec& spec,
                                                const AngularObservation& obs) {
  const double f = thumbnail_focal_px(spec);
  const Vec3 cam = world_to_camera(direction(obs.azimuth, obs.altitude),
                                   pose.heading + spec.heading_offset, spec.pitch, 0.0);
  if (cam[1] <= 0.0) return std::nullopt;
  const double u = f * cam[0] / cam[1] + spec.width / 2.0;
  const double v = -f * cam[2] / cam[1] + spec.height / 2.0;
  if (u < 0.0 || u > spec.width || v < 0.0 || v > spec.height) return std::nullopt;
  return PixelCoord{u - 0.5, v - 0.5};
}

AngularObservation pixel_to_angles(const PanoramaPose& pose, const ImageSource& image, double col,
                                   double row) {
  if (const auto* spec = std::get_if<ThumbnailSpec>(&image)) {
    return thumb_pixel_to_angles(pose, *spec, col, row);
  }
  return pano_pixel_to_angles(pose, col, row);
}

AngularExtents box_to_angular_extents(const PanoramaPose& pose, const ImageSource& image,
                                      const PixelBox& box) {
  if (box.col_max < box.col_min || box.row_max < box.row_min) {
    throw Error(ErrorCode::InvalidDetection, "bounding box has min > max");
  }
  if (box.col_max == box.col_min || box.row_max == box.row_min) {
    throw Error(ErrorCode::InvalidDetection, "bounding box has zero area");
  }
  const double col_c = 0.5 * (box.col_min + box.col_max);
  const double row_c = 0.5 * (box.row_min + box.row_max);
  AngularExtents ext;
  ext.theta_top = pixel_to_angles(pose, image, col_c, box.row_min).altitude;
  ext.theta_bottom = pixel_to_angles(pose, image, col_c, box.row_max).altitude;
  ext.az_center = pixel_to_angles(pose, image, col_c, row_c).azimuth;
  const double az_l = pixel_to_angles(pose, image, box.col_min, row_c).azimuth;
  const double az_r = pixel_to_angles(pose, image, box.col_max, row_c).azimuth;
  ext.hfov_box = normalize_deg(az_r - az_l);
  return ext;
}

double vertical_pixel_angle(const PanoramaPose& pose, const ImageSource& image) {
  if (const auto* spec = std::get_if<ThumbnailSpec>(&image)) {
    return rad2deg(std::atan(1.0 / thumbnail_focal_px(*spec)));
  }
  check_pose_image(pose);
  return 180.0 / pose.image_height;
}

}  // namespace svim
