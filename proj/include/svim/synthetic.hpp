#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "svim/geo.hpp"
#include "svim/projection.hpp"
#include "svim/tacheometry.hpp"
#include "svim/triangulation.hpp"
#include "svim/width.hpp"

namespace svim {

/// Straight-segment strip; polyline vertices are east/north meters from the scene anchor.
struct Ribbon {
  std::vector<std::array<double, 2>> polyline;
  double width_m = 0.0;
  std::string class_name;
};

/// Planar sign facing the camera.
struct Billboard {
  GeoPoint position;
  double bottom_height_m = 0.0;  // above local ground
  double height_m = 0.0;
  double width_m = 0.0;
  std::string class_name;
};

struct Cylinder {
  GeoPoint position;
  double radius_m = 0.0;
  double height_m = 0.0;
};

struct NoiseSpec {
  double angle_deg_sigma = 0.0;
  double pose_m_sigma = 0.0;
  double depth_m_sigma = 0.0;
};

struct LandCoverExtent {
  double resolution_m = 0.25;
  double width_m = 0.0;
  double height_m = 0.0;
  double heading_deg = 0.0;
};

struct SceneSpec {
  GeoPoint anchor;
  std::map<std::uint8_t, std::string> class_table{
      {0, "terrain"}, {1, "road"}, {2, "vehicle"}, {3, "sidewalk"}};
  std::string background_class = "terrain";
  std::vector<Ribbon> ribbons;
  std::vector<Billboard> billboards;
  std::vector<Cylinder> cylinders;
  std::vector<PanoramaPose> cameras;
  std::optional<LandCoverExtent> landcover;
  ThumbnailLayout thumbnails;
  double measure_height_m = 1.3;
  std::uint64_t seed = 0;
  NoiseSpec noise;
};

void validate(const SceneSpec& scene);

bool ribbon_contains(const Ribbon& ribbon, double east, double north);

/// Rasterizes ribbons north-up around the anchor; later ribbons overwrite earlier ones.
LandCoverRaster render_landcover(const SceneSpec& scene, const LandCoverExtent& extent);

struct BillboardProjection {
  PixelBox box;
  double theta_top = 0.0;
  double theta_bottom = 0.0;
  double azimuth = 0.0;
  double d_hor = 0.0;  // ground truth
  double h_b = 0.0;    // ground truth, bottom relative to camera
};

/// Exact edge angles from scene geometry, pixel box quantized to the nearest pixel centers.
BillboardProjection project_billboard(const PanoramaPose& camera, const Billboard& billboard,
                                      const ImageSource& image = PanoramaImage{});

struct CylinderProjection {
  double az_left = 0.0;
  double az_right = 0.0;
  double az_center = 0.0;
  double half_angle = 0.0;  // asin(r / d)
  double depth = 0.0;       // horizontal distance to the axis
  double altitude = 0.0;    // altitude of the measuring point on the axis
};

CylinderProjection project_cylinder(const PanoramaPose& camera, const Cylinder& cylinder,
                                    double measure_height_m);

/// Seeded isotropic Gaussian noise. A zero sigma returns its input untouched.
class Perturber {
 public:
  Perturber(const NoiseSpec& noise, std::uint64_t seed);

  double angle(double deg);
  double depth(double meters);
  GeoPoint position(const GeoPoint& p);

 private:
  double draw(double sigma);

  NoiseSpec noise_;
  std::mt19937_64 rng_;
};

TrunkObservation perturb(const TrunkObservation& obs, Perturber& perturber);
PanoramaPose perturb(const PanoramaPose& pose, Perturber& perturber);

struct SyntheticDetection {
  std::string pano_id;
  Detection detection;
  std::size_t billboard_index = 0;
};

/// Panorama detections for every visible billboard from every camera.
std::vector<SyntheticDetection> synthesize_detections(const SceneSpec& scene);

struct SyntheticTrunkObservation {
  TrunkObservation observation;
  std::size_t cylinder_index = 0;
};

/// One observation per (camera, planned thumbnail, cylinder) where both trunk edges
/// fall inside the thumbnail, with seeded noise applied to angles and depth.
std::vector<SyntheticTrunkObservation> synthesize_trunk_observations(const SceneSpec& scene);

}  // namespace svim
