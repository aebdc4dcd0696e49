#include "svim/synthetic.hpp"

#include <cmath>

#include "svim/error.hpp"

namespace svim {

void validate(const SceneSpec& scene) {
  validate(scene.anchor);
  for (const auto& r : scene.ribbons) {
    if (!(r.width_m > 0.0)) throw Error(ErrorCode::InvalidScene, "ribbon width must be positive");
    if (r.polyline.size() < 2) throw Error(ErrorCode::InvalidScene, "ribbon needs two vertices");
  }
  for (const auto& b : scene.billboards) {
    if (!(b.height_m > 0.0) || !(b.width_m > 0.0)) {
      throw Error(ErrorCode::InvalidScene, "billboard dimensions must be positive");
    }
  }
  for (const auto& c : scene.cylinders) {
    if (!(c.radius_m > 0.0) || !(c.height_m > 0.0)) {
      throw Error(ErrorCode::InvalidScene, "cylinder dimensions must be positive");
    }
  }
  const NoiseSpec& n = scene.noise;
  if (n.angle_deg_sigma < 0.0 || n.pose_m_sigma < 0.0 || n.depth_m_sigma < 0.0) {
    throw Error(ErrorCode::InvalidScene, "noise sigmas must be non-negative");
  }
}

bool ribbon_contains(const Ribbon& ribbon, double east, double north) {
  const double half = ribbon.width_m / 2.0;
  for (std::size_t i = 0; i + 1 < ribbon.polyline.size(); ++i) {
    const auto& a = ribbon.polyline[i];
    const auto& b = ribbon.polyline[i + 1];
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    const double len = std::hypot(dx, dy);
    if (len == 0.0) continue;
    const double px = east - a[0];
    const double py = north - a[1];
    const double along = (px * dx + py * dy) / len;
    const double across = (px * dy - py * dx) / len;
    if (along >= 0.0 && along <= len && std::abs(across) <= half) return true;
  }
  return false;
}

LandCoverRaster render_landcover(const SceneSpec& scene, const LandCoverExtent& extent) {
  if (!(extent.resolution_m > 0.0)) throw Error(ErrorCode::Config, "resolution must be positive");
  const int w = static_cast<int>(std::lround(extent.width_m / extent.resolution_m));
  const int h = static_cast<int>(std::lround(extent.height_m / extent.resolution_m));
  if (w <= 0 || h <= 0) throw Error(ErrorCode::InvalidScene, "landcover extent is empty");

  auto id_of = [&](const std::string& name) {
    for (const auto& [id, n] : scene.class_table) {
      if (n == name) return id;
    }
    throw Error(ErrorCode::InvalidScene, "class '" + name + "' not in scene class table");
  };

  LandCoverRaster raster;
  raster.resolution = extent.resolution_m;
  raster.center = scene.anchor;
  raster.heading = normalize_deg(extent.heading_deg);
  raster.class_table = scene.class_table;
  raster.grid = ClassRaster(w, h, id_of(scene.background_class));
  std::vector<std::uint8_t> ids;
  for (const auto& r : scene.ribbons) ids.push_back(id_of(r.class_name));

  for (int row = 0; row < h; ++row) {
    const double north = (h / 2.0 - row - 0.5) * extent.resolution_m;
    for (int col = 0; col < w; ++col) {
      const double east = (col + 0.5 - w / 2.0) * extent.resolution_m;
      for (std::size_t i = 0; i < scene.ribbons.size(); ++i) {
        if (ribbon_contains(scene.ribbons[i], east, north)) raster.grid(col, row) = ids[i];
      }
    }
  }
  return raster;
}

BillboardProjection project_billboard(const PanoramaPose& camera, const Billboard& billboard,
                                      const ImageSource& image) {
  const LocalPoint rel = geo_to_local(billboard.position, camera.position);
  const double d = std::hypot(rel.east, rel.north);
  if (d < 1e-6) throw Error(ErrorCode::NotVisible, "billboard at the camera position");

  BillboardProjection p;
  p.d_hor = d;
  p.h_b = rel.up + billboard.bottom_height_m - camera.camera_height;
  p.azimuth = normalize_deg(rad2deg(std::atan2(rel.east, rel.north)));
  p.theta_bottom = rad2deg(std::atan2(p.h_b, d));
  p.theta_top = rad2deg(std::atan2(p.h_b + billboard.height_m, d));
  const double half_w = rad2deg(std::atan2(billboard.width_m / 2.0, d));
  const double mid = 0.5 * (p.theta_top + p.theta_bottom);

  auto project = [&](double az, double alt) -> PixelCoord {
    const AngularObservation obs{normalize_deg(az), alt};
    if (const auto* spec = std::get_if<ThumbnailSpec>(&image)) {
      const auto px = angles_to_thumb_pixel(camera, *spec, obs);
      if (!px) throw Error(ErrorCode::NotVisible, "billboard outside thumbnail");
      return *px;
    }
    return angles_to_pano_pixel(camera, obs);
  };
  const PixelCoord top = project(p.azimuth, p.theta_top);
  const PixelCoord bottom = project(p.azimuth, p.theta_bottom);
  const PixelCoord left = project(p.azimuth - half_w, mid);
  const PixelCoord right = project(p.azimuth + half_w, mid);

  p.box.image_id = camera.pano_id;
  p.box.col_min = static_cast<int>(std::lround(left.col));
  p.box.col_max = static_cast<int>(std::lround(right.col));
  p.box.row_min = static_cast<int>(std::lround(top.row));
  p.box.row_max = static_cast<int>(std::lround(bottom.row));
  if (p.box.col_min > p.box.col_max) {
    throw Error(ErrorCode::NotVisible, "billboard straddles the panorama seam");
  }
  return p;
}

CylinderProjection project_cylinder(const PanoramaPose& camera, const Cylinder& cylinder,
                                    double measure_height_m) {
  const LocalPoint rel = geo_to_local(cylinder.position, camera.position);
  const double d = std::hypot(rel.east, rel.north);
  if (d <= cylinder.radius_m) throw Error(ErrorCode::InvalidScene, "camera inside cylinder");
  CylinderProjection p;
  p.depth = d;
  p.az_center = normalize_deg(rad2deg(std::atan2(rel.east, rel.north)));
  p.half_angle = rad2deg(std::asin(cylinder.radius_m / d));
  p.az_left = normalize_deg(p.az_center - p.half_angle);
  p.az_right = normalize_deg(p.az_center + p.half_angle);
  p.altitude = rad2deg(std::atan2(rel.up + measure_height_m - camera.camera_height, d));
  return p;
}

Perturber::Perturber(const NoiseSpec& noise, std::uint64_t seed) : noise_(noise), rng_(seed) {}

double Perturber::draw(double sigma) {
  std::normal_distribution<double> dist(0.0, sigma);
  return dist(rng_);
}

double Perturber::angle(double deg) {
  return noise_.angle_deg_sigma > 0.0 ? deg + draw(noise_.angle_deg_sigma) : deg;
}

double Perturber::depth(double meters) {
  return noise_.depth_m_sigma > 0.0 ? meters + draw(noise_.depth_m_sigma) : meters;
}

GeoPoint Perturber::position(const GeoPoint& p) {
  if (!(noise_.pose_m_sigma > 0.0)) return p;
  const double e = draw(noise_.pose_m_sigma);
  const double n = draw(noise_.pose_m_sigma);
  return local_to_geo(LocalPoint{e, n, 0.0}, p);
}

TrunkObservation perturb(const TrunkObservation& obs, Perturber& perturber) {
  TrunkObservation out = obs;
  out.az_left = normalize_deg(perturber.angle(obs.az_left));
  out.az_right = normalize_deg(perturber.angle(obs.az_right));
  out.az_center = normalize_deg(perturber.angle(obs.az_center));
  if (obs.depth_m) out.depth_m = perturber.depth(*obs.depth_m);
  return out;
}

PanoramaPose perturb(const PanoramaPose& pose, Perturber& perturber) {
  PanoramaPose out = pose;
  out.position = perturber.position(pose.position);
  return out;
}

std::vector<SyntheticDetection> synthesize_detections(const SceneSpec& scene) {
  validate(scene);
  std::vector<SyntheticDetection> out;
  for (const auto& cam : scene.cameras) {
    for (std::size_t i = 0; i < scene.billboards.size(); ++i) {
      try {
        const BillboardProjection p = project_billboard(cam, scene.billboards[i]);
        out.push_back({cam.pano_id, Detection{scene.billboards[i].class_name, p.box, PanoramaImage{}, 1.0}, i});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotVisible) throw;
      }
    }
  }
  return out;
}

std::vector<SyntheticTrunkObservation> synthesize_trunk_observations(const SceneSpec& scene) {
  validate(scene);
  Perturber perturber(scene.noise, scene.seed);
  std::vector<SyntheticTrunkObservation> out;
  for (const auto& cam : scene.cameras) {
    const auto specs = plan_thumbnails(cam, scene.thumbnails);
    for (std::size_t i = 0; i < scene.cylinders.size(); ++i) {
      const CylinderProjection p = project_cylinder(cam, scene.cylinders[i], scene.measure_height_m);
      for (const auto& spec : specs) {
        const bool left_in = angles_to_thumb_pixel(cam, spec, {p.az_left, p.altitude}).has_value();
        const bool right_in = angles_to_thumb_pixel(cam, spec, {p.az_right, p.altitude}).has_value();
        if (!left_in || !right_in) continue;
        TrunkObservation obs;
        obs.pano_id = cam.pano_id;
        obs.thumbnail = spec;
        obs.az_left = p.az_left;
        obs.az_right = p.az_right;
        obs.az_center = p.az_center;
        obs.depth_m = p.depth;
        out.push_back({perturb(obs, perturber), i});
      }
    }
  }
  return out;
}

}  // namespace svim
