#pragma once

#include <map>
#include <string>
#include <vector>

#include "svim/geo.hpp"
#include "svim/projection.hpp"

namespace svim {

inline constexpr double kDefaultMinAngularHeightDeg = 0.01;
inline constexpr double kDefaultMergeRadiusM = 3.0;

enum class LocateMethod { Tacheometry, Triangulation, Depth };
const char* to_string(LocateMethod method) noexcept;

/// Known vertical extents per detection class.
class DimensionRegistry {
 public:
  /// Seeded with stop_sign = 0.75 m.
  DimensionRegistry();
  explicit DimensionRegistry(std::map<std::string, double> heights);

  void set(const std::string& class_name, double height_m);
  /// Throws ErrorCode::Config for unknown classes.
  double height(const std::string& class_name) const;
  bool contains(const std::string& class_name) const { return heights_.count(class_name) != 0; }
  const std::map<std::string, double>& entries() const { return heights_; }

 private:
  std::map<std::string, double> heights_;
};

struct TachInput {
  double theta_top = 0.0;     // degrees, signed altitude of the object top
  double theta_bottom = 0.0;  // degrees, signed altitude of the object bottom
  double object_height = 0.0; // meters
};

struct TachResult {
  double d_hor = 0.0;  // horizontal camera-to-object distance
  double h_b = 0.0;    // signed height of the object bottom relative to the camera
};

/// d_hor = h_o cos(t) cos(b) / sin(t - b) with signed altitudes; h_b = tan(b) d_hor.
TachResult tacheometric_distance(const TachInput& in,
                                 double min_angular_height_deg = kDefaultMinAngularHeightDeg);

/// Worst-case |d_hor error| when each edge angle may be off by up to angle_error_deg.
/// Infinite when the perturbed angular height collapses.
double distance_uncertainty(const TachInput& in, double angle_error_deg);

struct LocatedObject {
  std::string class_name;
  GeoPoint position;
  double d_hor = 0.0;
  double h_b = 0.0;
  double azimuth = 0.0;
  std::string source_pano;
  LocateMethod method = LocateMethod::Tacheometry;
  double d_hor_uncertainty = 0.0;
  double bottom_above_ground = 0.0;  // camera_height + h_b
  int n_observations = 1;
};

LocatedObject place_object(const PanoramaPose& pose, double d_hor, double h_b, double azimuth);

struct Detection {
  std::string class_name;
  PixelBox box;
  ImageSource image;
  double confidence = 1.0;
};

LocatedObject localize_detection(const PanoramaPose& pose, const Detection& detection,
                                 const DimensionRegistry& registry,
                                 double min_angular_height_deg = kDefaultMinAngularHeightDeg);

/// Single-linkage clustering of same-class objects by horizontal distance; each
/// cluster is placed at the component-wise median of its members.
std::vector<LocatedObject> merge_observations(const std::vector<LocatedObject>& objects,
                                              double radius_m = kDefaultMergeRadiusM);

double median(std::vector<double> values);

}  // namespace svim
