#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "svim/geo.hpp"
#include "svim/projection.hpp"

namespace svim {

inline constexpr double kDefaultMatchDistanceM = 3.0;
inline constexpr double kDefaultMinThetaCDeg = 2.0;
inline constexpr double kMinBaselineM = 0.5;

/// One trunk seen in one thumbnail, reduced to world azimuths at the measuring height.
struct TrunkObservation {
  std::string pano_id;
  ThumbnailSpec thumbnail;
  double az_left = 0.0;
  double az_right = 0.0;
  double az_center = 0.0;
  std::optional<double> depth_m;
  std::optional<GeoPoint> coarse_position;
};

/// Signed shortest arc from az_left to az_right; must lie in (0, 90).
double angular_width(const TrunkObservation& obs);
void validate(const TrunkObservation& obs);

struct ThumbnailLayout {
  double pitch = 0.0;
  double hfov = 90.0;
  int width = 640;
  int height = 640;
};

/// Six thumbnails at heading offsets +45, +90, +135, -45, -90, -135 (right side positive).
std::array<ThumbnailSpec, 6> plan_thumbnails(const PanoramaPose& pose,
                                             const ThumbnailLayout& layout = {});

struct ThumbnailPair {
  std::string side;       // "right" or "left"
  ThumbnailSpec rear;     // thumbnail of the earlier panorama in the sequence
  ThumbnailSpec forward;  // trailing (+/-135) thumbnail of the later panorama
};

bool adjacent(const PanoramaPose& a, const PanoramaPose& b);

/// Pairs the trailing thumbnail of the forward panorama with each same-side thumbnail
/// of the rear one: three pairs per side. Throws PairingRejected for non-adjacent poses.
std::vector<ThumbnailPair> candidate_pairs(const PanoramaPose& a, const PanoramaPose& b,
                                           const ThumbnailLayout& layout = {});

/// Coarse trunk position from monocular depth along az_center.
GeoPoint locate_from_depth(const TrunkObservation& obs, const PanoramaPose& pose);

/// True iff both coarse positions exist and lie within max_dist_m horizontally.
bool match_by_depth(const TrunkObservation& a, const TrunkObservation& b,
                    double max_dist_m = kDefaultMatchDistanceM);

/// One-to-one assignment under the depth rule: candidate couples within max_dist_m
/// are taken closest first, each observation at most once. Returns (index_a, index_b)
/// sorted by index_a.
std::vector<std::pair<std::size_t, std::size_t>> match_observations(
    const std::vector<TrunkObservation>& a, const std::vector<TrunkObservation>& b,
    double max_dist_m = kDefaultMatchDistanceM);

struct StereoPair {
  PanoramaPose pose_a;
  PanoramaPose pose_b;
  TrunkObservation obs_a;
  TrunkObservation obs_b;
  double baseline = 0.0;          // s_c
  double baseline_bearing = 0.0;  // bearing from A to B
};

StereoPair make_stereo_pair(const PanoramaPose& pose_a, const TrunkObservation& obs_a,
                            const PanoramaPose& pose_b, const TrunkObservation& obs_b);

/// Apex of the triangle in the baseline frame (A at origin, B at (s_c, 0)).
/// side = +1 puts the apex at positive y.
struct BaselineApex {
  double x = 0.0;
  double y = 0.0;
  double s_b = 0.0;  // |AC|
  double s_a = 0.0;  // |BC|
  double theta_c = 0.0;
};
BaselineApex triangle_apex(double s_c, double theta_a_deg, double theta_b_deg, int side);

struct TriangulatedTree {
  GeoPoint position;
  double s_a = 0.0;
  double s_b = 0.0;
  double s_c = 0.0;
  double theta_a = 0.0;
  double theta_b = 0.0;
  double theta_c = 0.0;
  double diameter = 0.0;
  std::vector<double> per_image_diameters;
  double mean_diameter = 0.0;
  int n_pairs = 1;
  double theta_c_min = 0.0;
};

TriangulatedTree triangulate(const StereoPair& pair, double min_theta_c_deg = kDefaultMinThetaCDeg);

enum class DiameterMode {
  Tangent,         // d = 2 s tan(theta / 2)
  ExactCylinder,   // d = 2 s sin(theta / 2), s measured to the trunk axis
};

struct PairDiameter {
  double diameter_a = 0.0;
  double diameter_b = 0.0;
  double mean = 0.0;
};

double diameter_from_angle(double theta_deg, double distance_m, DiameterMode mode);
PairDiameter diameter_from_pair(const StereoPair& pair, const TriangulatedTree& tri,
                                DiameterMode mode = DiameterMode::Tangent);

/// Triangulates and fills in the diameter fields.
TriangulatedTree measure_pair(const StereoPair& pair, DiameterMode mode = DiameterMode::Tangent,
                              double min_theta_c_deg = kDefaultMinThetaCDeg);

/// Median position and mean of per-pair diameters.
TriangulatedTree aggregate_tree(const std::vector<TriangulatedTree>& measurements);

}  // namespace svim
