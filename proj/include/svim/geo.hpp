#pragma once

#include <string>

namespace svim {

inline constexpr double kPi = 3.14159265358979323846;
/// Spherical earth radius used by the local tangent plane.
inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kDefaultCameraHeightM = 2.5;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into [0, 360).
double normalize_deg(double deg);
/// Wraps an angle into [-180, 180).
double wrap180(double deg);

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
  double alt = 0.0;  // meters, caller-defined datum

  bool operator==(const GeoPoint&) const = default;
};

/// East/north/up offsets in meters from an anchor GeoPoint.
struct LocalPoint {
  double east = 0.0;
  double north = 0.0;
  double up = 0.0;

  bool operator==(const LocalPoint&) const = default;
};

struct PanoramaPose {
  std::string pano_id;
  GeoPoint position;
  double camera_height = kDefaultCameraHeightM;
  double heading = 0.0;  // clockwise from true north, [0, 360)
  double pitch = 0.0;
  double roll = 0.0;
  int image_width = 0;
  int image_height = 0;
  // Capture-track adjacency. The loader fills seq_index from file order when absent.
  std::string sequence_id;
  int seq_index = 0;

  bool operator==(const PanoramaPose&) const = default;
};

/// Throws ErrorCode::InvalidCoordinate on NaN or out-of-range lat/lon.
void validate(const GeoPoint& p);

double meters_per_degree_lat();
double meters_per_degree_lon(double lat_deg);

LocalPoint geo_to_local(const GeoPoint& p, const GeoPoint& anchor);
GeoPoint local_to_geo(const LocalPoint& p, const GeoPoint& anchor);

/// Clockwise-from-north azimuth of b seen from a, in [0, 360).
double bearing_between(const GeoPoint& a, const GeoPoint& b);
/// Horizontal separation in the tangent plane anchored at a.
double horizontal_distance(const GeoPoint& a, const GeoPoint& b);

}  // namespace svim
