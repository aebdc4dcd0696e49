#include "svim/io.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <cctype>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <sstream>

#include "svim/error.hpp"

namespace svim::io {
namespace {

template <typename T>
T require(const json& j, const char* field, const std::string& where) {
  if (!j.is_object() || !j.contains(field) || j.at(field).is_null()) {
    throw Error(ErrorCode::Schema, where + ": missing required field '" + field + "'");
  }
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Schema, where + ": field '" + std::string(field) + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* field, const std::string& where) {
  if (!j.is_object() || !j.contains(field) || j.at(field).is_null()) return std::nullopt;
  return require<T>(j, field, where);
}

template <typename T>
T field_or(const json& j, const char* field, T fallback, const std::string& where) {
  return optional_field<T>(j, field, where).value_or(fallback);
}

std::map<std::uint8_t, std::string> class_table_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::Schema, where + ": class_table must be an object");
  std::map<std::uint8_t, std::string> table;
  for (const auto& [key, value] : j.items()) {
    int id = -1;
    try {
      std::size_t used = 0;
      id = std::stoi(key, &used);
      if (used != key.size()) id = -1;
    } catch (const std::exception&) {
      id = -1;
    }
    if (id < 0 || id > 255 || !value.is_string()) {
      throw Error(ErrorCode::Schema, where + ": class_table entry '" + key + "' is not id -> name");
    }
    table[static_cast<std::uint8_t>(id)] = value.get<std::string>();
  }
  return table;
}

json class_table_to_json(const std::map<std::uint8_t, std::string>& table) {
  json j = json::object();
  for (const auto& [id, name] : table) j[std::to_string(id)] = name;
  return j;
}

GeoPoint geo_from_json(const json& j, const std::string& where) {
  GeoPoint p{require<double>(j, "lat", where), require<double>(j, "lon", where),
             field_or<double>(j, "alt", 0.0, where)};
  try {
    validate(p);
  } catch (const Error& e) {
    throw Error(ErrorCode::Schema, where + ": " + e.what());
  }
  return p;
}

// JSON has no infinity; unbounded values serialize as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

std::string sha256_file(const fs::path& path) {
  const std::string data = read_text_file(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed for '" + path.string() + "'");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::vector<json> parse_records(const std::string& text, const std::string& source) {
  std::vector<json> records;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return records;
  if (text[first] == '[') {
    try {
      const json arr = json::parse(text);
      for (const auto& item : arr) records.push_back(item);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Schema, source + ": " + e.what());
    }
    return records;
  }
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Schema, source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

PanoramaPose pose_from_json(const json& j, std::vector<std::string>* warnings) {
  const std::string where = "pano '" + field_or<std::string>(j, "pano_id", "?", "pano") + "'";
  PanoramaPose pose;
  pose.pano_id = require<std::string>(j, "pano_id", "pano record");
  pose.position = geo_from_json(j, where);
  const double heading = require<double>(j, "heading_deg", where);
  pose.heading = normalize_deg(heading);
  if (pose.heading != heading && warnings) {
    warnings->push_back(where + ": heading " + std::to_string(heading) + " normalized to " +
                        std::to_string(pose.heading));
  }
  pose.pitch = field_or<double>(j, "pitch_deg", 0.0, where);
  pose.roll = field_or<double>(j, "roll_deg", 0.0, where);
  pose.camera_height = field_or<double>(j, "camera_height_m", kDefaultCameraHeightM, where);
  pose.image_width = require<int>(j, "image_width", where);
  pose.image_height = require<int>(j, "image_height", where);
  if (pose.image_width <= 0 || pose.image_height <= 0) {
    throw Error(ErrorCode::Schema, where + ": image dimensions must be positive");
  }
  if (pose.image_width != 2 * pose.image_height && warnings) {
    warnings->push_back(where + ": image is not 2:1 equirectangular");
  }
  pose.sequence_id = field_or<std::string>(j, "sequence_id", "", where);
  pose.seq_index = field_or<int>(j, "seq_index", -1, where);
  return pose;
}

json pose_to_json(const PanoramaPose& pose) {
  return json{{"pano_id", pose.pano_id},
              {"lat", pose.position.lat},
              {"lon", pose.position.lon},
              {"alt", pose.position.alt},
              {"heading_deg", pose.heading},
              {"pitch_deg", pose.pitch},
              {"roll_deg", pose.roll},
              {"camera_height_m", pose.camera_height},
              {"image_width", pose.image_width},
              {"image_height", pose.image_height},
              {"sequence_id", pose.sequence_id},
              {"seq_index", pose.seq_index}};
}

std::vector<PanoramaPose> parse_pano_metadata(const std::string& text, const std::string& source,
                                              std::vector<std::string>* warnings) {
  std::vector<PanoramaPose> poses;
  std::map<std::string, int> next_index;
  for (const json& rec : parse_records(text, source)) {
    PanoramaPose pose = pose_from_json(rec, warnings);
    int& counter = next_index[pose.sequence_id];
    if (pose.seq_index < 0) pose.seq_index = counter;
    counter = pose.seq_index + 1;
    poses.push_back(std::move(pose));
  }
  return poses;
}

std::vector<PanoramaPose> load_pano_metadata(const fs::path& path, std::vector<std::string>* warnings) {
  return parse_pano_metadata(read_text_file(path), path.string(), warnings);
}

void write_pano_metadata(const std::vector<PanoramaPose>& poses, const fs::path& path) {
  std::string text;
  for (const auto& p : poses) text += pose_to_json(p).dump() + "\n";
  write_text_file(path, text);
}

ThumbnailSpec thumbnail_from_json(const json& j) {
  const std::string where = "thumbnail_spec";
  ThumbnailSpec spec;
  spec.pano_id = field_or<std::string>(j, "pano_id", "", where);
  spec.heading_offset = require<double>(j, "heading_offset_deg", where);
  spec.pitch = field_or<double>(j, "pitch_deg", 0.0, where);
  spec.hfov = field_or<double>(j, "hfov_deg", 90.0, where);
  spec.width = require<int>(j, "width", where);
  spec.height = require<int>(j, "height", where);
  validate(spec);
  return spec;
}

json thumbnail_to_json(const ThumbnailSpec& spec) {
  return json{{"pano_id", spec.pano_id},         {"heading_offset_deg", spec.heading_offset},
              {"pitch_deg", spec.pitch},         {"hfov_deg", spec.hfov},
              {"width", spec.width},             {"height", spec.height}};
}

DetectionRecord detection_from_json(const json& j) {
  const std::string where = "detection";
  DetectionRecord rec;
  if (j.contains("thumbnail_spec") && !j.at("thumbnail_spec").is_null()) {
    ThumbnailSpec spec = thumbnail_from_json(j.at("thumbnail_spec"));
    rec.pano_id = field_or<std::string>(j, "pano_id", spec.pano_id, where);
    spec.pano_id = rec.pano_id;
    rec.detection.image = spec;
  } else {
    rec.pano_id = require<std::string>(j, "pano_id", where);
    rec.detection.image = PanoramaImage{};
  }
  if (rec.pano_id.empty()) throw Error(ErrorCode::Schema, where + ": missing required field 'pano_id'");
  rec.detection.class_name = require<std::string>(j, "class", where);
  rec.detection.box.image_id = rec.pano_id;
  rec.detection.box.col_min = require<int>(j, "col_min", where);
  rec.detection.box.row_min = require<int>(j, "row_min", where);
  rec.detection.box.col_max = require<int>(j, "col_max", where);
  rec.detection.box.row_max = require<int>(j, "row_max", where);
  rec.detection.confidence = field_or<double>(j, "confidence", 1.0, where);
  return rec;
}

json detection_to_json(const std::string& pano_id, const Detection& detection) {
  json j{{"pano_id", pano_id},
         {"class", detection.class_name},
         {"col_min", detection.box.col_min},
         {"row_min", detection.box.row_min},
         {"col_max", detection.box.col_max},
         {"row_max", detection.box.row_max},
         {"confidence", detection.confidence}};
  if (const auto* spec = std::get_if<ThumbnailSpec>(&detection.image)) {
    j["thumbnail_spec"] = thumbnail_to_json(*spec);
  }
  return j;
}

std::vector<DetectionRecord> load_detections(const fs::path& path) {
  std::vector<DetectionRecord> out;
  for (const json& rec : parse_records(read_text_file(path), path.string())) {
    out.push_back(detection_from_json(rec));
  }
  return out;
}

ObservationRecord observation_from_json(const json& j, const fs::path& base_dir) {
  const std::string where = "observation";
  ObservationRecord rec;
  if (!j.contains("thumbnail_spec")) {
    throw Error(ErrorCode::Schema, where + ": missing required field 'thumbnail_spec'");
  }
  rec.thumbnail = thumbnail_from_json(j.at("thumbnail_spec"));
  rec.pano_id = field_or<std::string>(j, "pano_id", rec.thumbnail.pano_id, where);
  if (rec.pano_id.empty()) throw Error(ErrorCode::Schema, where + ": missing required field 'pano_id'");
  rec.thumbnail.pano_id = rec.pano_id;
  rec.az_left_deg = optional_field<double>(j, "az_left_deg", where);
  rec.az_right_deg = optional_field<double>(j, "az_right_deg", where);
  rec.col_left = optional_field<double>(j, "col_left", where);
  rec.col_right = optional_field<double>(j, "col_right", where);
  rec.row_measure = optional_field<double>(j, "row_measure", where);
  if (auto mask = optional_field<std::string>(j, "mask_path", where)) {
    fs::path p(*mask);
    rec.mask_path = p.is_absolute() ? p : base_dir / p;
  }
  rec.depth_m = optional_field<double>(j, "depth_m", where);

  const bool angles = rec.az_left_deg && rec.az_right_deg;
  const bool pixels = rec.col_left && rec.col_right && rec.row_measure;
  if (!angles && !pixels && !rec.mask_path) {
    throw Error(ErrorCode::Schema, where + ": needs az_left_deg/az_right_deg, col_left/col_right/"
                                           "row_measure, or mask_path");
  }
  return rec;
}

json observation_to_json(const TrunkObservation& obs) {
  json j{{"pano_id", obs.pano_id},
         {"thumbnail_spec", thumbnail_to_json(obs.thumbnail)},
         {"az_left_deg", obs.az_left},
         {"az_right_deg", obs.az_right}};
  if (obs.depth_m) j["depth_m"] = *obs.depth_m;
  return j;
}

std::vector<ObservationRecord> load_observations(const fs::path& path) {
  std::vector<ObservationRecord> out;
  for (const json& rec : parse_records(read_text_file(path), path.string())) {
    out.push_back(observation_from_json(rec, path.parent_path()));
  }
  return out;
}

TrunkObservation resolve_observation(const ObservationRecord& rec, const PanoramaPose& pose) {
  TrunkObservation obs;
  if (rec.az_left_deg && rec.az_right_deg) {
    obs.pano_id = rec.pano_id;
    obs.thumbnail = rec.thumbnail;
    obs.az_left = normalize_deg(*rec.az_left_deg);
    obs.az_right = normalize_deg(*rec.az_right_deg);
    obs.az_center = normalize_deg(obs.az_left + wrap180(obs.az_right - obs.az_left) / 2.0);
  } else if (rec.col_left && rec.col_right && rec.row_measure) {
    obs.pano_id = rec.pano_id;
    obs.thumbnail = rec.thumbnail;
    obs.az_left = thumb_pixel_to_angles(pose, rec.thumbnail, *rec.col_left, *rec.row_measure).azimuth;
    obs.az_right = thumb_pixel_to_angles(pose, rec.thumbnail, *rec.col_right, *rec.row_measure).azimuth;
    const double mid = 0.5 * (*rec.col_left + *rec.col_right);
    obs.az_center = thumb_pixel_to_angles(pose, rec.thumbnail, mid, *rec.row_measure).azimuth;
  } else {
    const ClassRaster mask = read_class_raster(*rec.mask_path);
    BinaryRaster bin(mask.width(), mask.height(), 0);
    std::transform(mask.data().begin(), mask.data().end(), bin.data().begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v != 0); });
    obs = mask_to_trunk_observation(bin, rec.thumbnail, pose);
    obs.pano_id = rec.pano_id;
  }
  obs.depth_m = rec.depth_m;
  return obs;
}

TrunkObservation mask_to_trunk_observation(const BinaryRaster& mask, const ThumbnailSpec& spec,
                                           const PanoramaPose& pose) {
  const int w = mask.width();
  const int h = mask.height();
  // 8-connected component count.
  Raster<std::uint8_t> seen(w, h, 0);
  int components = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (mask(c, r) == 0 || seen(c, r)) continue;
      ++components;
      std::queue<std::pair<int, int>> todo;
      todo.emplace(c, r);
      seen(c, r) = 1;
      while (!todo.empty()) {
        const auto [cc, rr] = todo.front();
        todo.pop();
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int nc = cc + dc;
            const int nr = rr + dr;
            if (mask.contains(nc, nr) && mask(nc, nr) != 0 && !seen(nc, nr)) {
              seen(nc, nr) = 1;
              todo.emplace(nc, nr);
            }
          }
        }
      }
    }
  }
  if (components == 0) throw Error(ErrorCode::NoTrunk, "trunk mask is empty");
  if (components > 1) {
    throw Error(ErrorCode::AmbiguousMask,
                "trunk mask has " + std::to_string(components) + " components");
  }

  struct RowSpan {
    int row, left, right;
    int width() const { return right - left + 1; }
  };
  std::vector<RowSpan> spans;
  for (int r = 0; r < h; ++r) {
    int left = -1, right = -1;
    for (int c = 0; c < w; ++c) {
      if (mask(c, r) == 0) continue;
      if (left < 0) left = c;
      right = c;
    }
    if (left >= 0) spans.push_back({r, left, right});
  }
  std::vector<RowSpan> sorted = spans;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RowSpan& a, const RowSpan& b) { return a.width() < b.width(); });
  const RowSpan pick = sorted[(sorted.size() - 1) / 2];

  TrunkObservation obs;
  obs.pano_id = pose.pano_id;
  obs.thumbnail = spec;
  // Pixel edges bound the trunk silhouette.
  obs.az_left = thumb_pixel_to_angles(pose, spec, pick.left - 0.5, pick.row).azimuth;
  obs.az_right = thumb_pixel_to_angles(pose, spec, pick.right + 0.5, pick.row).azimuth;
  obs.az_center = thumb_pixel_to_angles(pose, spec, 0.5 * (pick.left + pick.right), pick.row).azimuth;
  return obs;
}

namespace {

void skip_pnm_space(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

ClassRaster read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::string magic;
  in >> magic;
  int w = 0, h = 0, maxval = 0;
  skip_pnm_space(in);
  in >> w;
  skip_pnm_space(in);
  in >> h;
  skip_pnm_space(in);
  in >> maxval;
  if (!in || (magic != "P5" && magic != "P2") || w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorCode::Schema, path.string() + ": not an 8-bit PGM");
  }
  ClassRaster raster(w, h, 0);
  if (magic == "P5") {
    in.get();
    in.read(reinterpret_cast<char*>(raster.data().data()), static_cast<std::streamsize>(raster.data().size()));
  } else {
    for (auto& v : raster.data()) {
      int x = 0;
      in >> x;
      v = static_cast<std::uint8_t>(x);
    }
  }
  if (!in) throw Error(ErrorCode::Schema, path.string() + ": truncated PGM data");
  return raster;
}

ClassRaster read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(ErrorCode::Schema, path.string() + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_COLOR) {
    png_image_free(&image);
    throw Error(ErrorCode::Schema, path.string() + ": class raster PNG must be single-band gray");
  }
  image.format = PNG_FORMAT_GRAY;
  ClassRaster raster(static_cast<int>(image.width), static_cast<int>(image.height), 0);
  if (!png_image_finish_read(&image, nullptr, raster.data().data(), 0, nullptr)) {
    throw Error(ErrorCode::Schema, path.string() + ": " + image.message);
  }
  return raster;
}

}  // namespace

ClassRaster read_class_raster(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::Io, "raster '" + path.string() + "' not found");
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" ? read_png(path) : read_pgm(path);
}

void write_pgm(const ClassRaster& raster, const fs::path& path) {
  std::string text = "P5\n" + std::to_string(raster.width()) + " " + std::to_string(raster.height()) + "\n255\n";
  text.append(reinterpret_cast<const char*>(raster.data().data()), raster.data().size());
  write_text_file(path, text);
}

LandCoverRaster landcover_from_sidecar(ClassRaster grid, const json& sidecar) {
  const std::string where = "landcover sidecar";
  LandCoverRaster raster;
  raster.grid = std::move(grid);
  raster.resolution = require<double>(sidecar, "resolution_m", where);
  raster.center = GeoPoint{require<double>(sidecar, "center_lat", where),
                           require<double>(sidecar, "center_lon", where),
                           field_or<double>(sidecar, "center_alt", 0.0, where)};
  raster.heading = normalize_deg(require<double>(sidecar, "heading_deg", where));
  if (!sidecar.contains("class_table")) {
    throw Error(ErrorCode::Schema, where + ": missing required field 'class_table'");
  }
  raster.class_table = class_table_from_json(sidecar.at("class_table"), where);
  try {
    validate(raster);
  } catch (const Error& e) {
    throw Error(ErrorCode::Schema, where + ": " + e.what());
  }
  return raster;
}

json landcover_sidecar(const LandCoverRaster& raster) {
  return json{{"resolution_m", raster.resolution},
              {"center_lat", raster.center.lat},
              {"center_lon", raster.center.lon},
              {"heading_deg", raster.heading},
              {"class_table", class_table_to_json(raster.class_table)}};
}

LandCoverRaster load_landcover(const fs::path& raster_path, const fs::path& sidecar_path) {
  ClassRaster grid = read_class_raster(raster_path);
  fs::path side = sidecar_path;
  if (side.empty()) side = fs::path(raster_path).replace_extension(".json");
  json sidecar;
  try {
    sidecar = json::parse(read_text_file(side));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, side.string() + ": " + e.what());
  }
  return landcover_from_sidecar(std::move(grid), sidecar);
}

void write_landcover(const LandCoverRaster& raster, const fs::path& raster_path) {
  write_pgm(raster.grid, raster_path);
  write_text_file(fs::path(raster_path).replace_extension(".json"), dump(landcover_sidecar(raster)));
}

DimensionRegistry load_registry(const fs::path& path) {
  DimensionRegistry registry;
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Schema, path.string() + ": registry must map class -> height_m");
  for (const auto& [name, value] : j.items()) {
    if (!value.is_number()) {
      throw Error(ErrorCode::Schema, path.string() + ": height for '" + name + "' is not a number");
    }
    registry.set(name, value.get<double>());
  }
  return registry;
}

SceneSpec scene_from_json(const json& j) {
  const std::string where = "scene";
  SceneSpec scene;
  if (!j.contains("anchor")) throw Error(ErrorCode::Schema, where + ": missing required field 'anchor'");
  scene.anchor = geo_from_json(j.at("anchor"), where + ".anchor");
  if (j.contains("class_table")) scene.class_table = class_table_from_json(j.at("class_table"), where);
  scene.background_class = field_or<std::string>(j, "background_class", scene.background_class, where);
  for (const json& r : j.value("ribbons", json::array())) {
    Ribbon ribbon;
    ribbon.polyline = require<std::vector<std::array<double, 2>>>(r, "polyline", where + ".ribbons");
    ribbon.width_m = require<double>(r, "width_m", where + ".ribbons");
    ribbon.class_name = require<std::string>(r, "class", where + ".ribbons");
    scene.ribbons.push_back(std::move(ribbon));
  }
  for (const json& b : j.value("billboards", json::array())) {
    Billboard board;
    board.position = geo_from_json(b, where + ".billboards");
    board.bottom_height_m = require<double>(b, "bottom_height_m", where + ".billboards");
    board.height_m = require<double>(b, "height_m", where + ".billboards");
    board.width_m = field_or<double>(b, "width_m", board.height_m, where + ".billboards");
    board.class_name = require<std::string>(b, "class", where + ".billboards");
    scene.billboards.push_back(board);
  }
  for (const json& c : j.value("cylinders", json::array())) {
    Cylinder cyl;
    cyl.position = geo_from_json(c, where + ".cylinders");
    cyl.radius_m = require<double>(c, "radius_m", where + ".cylinders");
    cyl.height_m = field_or<double>(c, "height_m", 5.0, where + ".cylinders");
    scene.cylinders.push_back(cyl);
  }
  std::map<std::string, int> next_index;
  for (const json& c : j.value("cameras", json::array())) {
    PanoramaPose pose = pose_from_json(c);
    int& counter = next_index[pose.sequence_id];
    if (pose.seq_index < 0) pose.seq_index = counter;
    counter = pose.seq_index + 1;
    scene.cameras.push_back(std::move(pose));
  }
  if (j.contains("landcover")) {
    const json& l = j.at("landcover");
    scene.landcover = LandCoverExtent{field_or<double>(l, "resolution_m", 0.25, where + ".landcover"),
                                      require<double>(l, "width_m", where + ".landcover"),
                                      require<double>(l, "height_m", where + ".landcover"),
                                      field_or<double>(l, "heading_deg", 0.0, where + ".landcover")};
  }
  if (j.contains("thumbnails")) {
    const json& t = j.at("thumbnails");
    scene.thumbnails.width = field_or<int>(t, "width", scene.thumbnails.width, where);
    scene.thumbnails.height = field_or<int>(t, "height", scene.thumbnails.height, where);
    scene.thumbnails.hfov = field_or<double>(t, "hfov_deg", scene.thumbnails.hfov, where);
    scene.thumbnails.pitch = field_or<double>(t, "pitch_deg", scene.thumbnails.pitch, where);
  }
  scene.measure_height_m = field_or<double>(j, "measure_height_m", scene.measure_height_m, where);
  scene.seed = field_or<std::uint64_t>(j, "seed", 0, where);
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    scene.noise.angle_deg_sigma = field_or<double>(n, "angle_deg_sigma", 0.0, where);
    scene.noise.pose_m_sigma = field_or<double>(n, "pose_m_sigma", 0.0, where);
    scene.noise.depth_m_sigma = field_or<double>(n, "depth_m_sigma", 0.0, where);
  }
  try {
    validate(scene);
  } catch (const Error& e) {
    throw Error(ErrorCode::Schema, e.what());
  }
  return scene;
}

SceneSpec load_scene(const fs::path& path) {
  try {
    return scene_from_json(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, path.string() + ": " + e.what());
  }
}

json point_geometry(const GeoPoint& p) {
  return json{{"type", "Point"}, {"coordinates", {p.lon, p.lat, p.alt}}};
}

json line_geometry(const std::vector<GeoPoint>& points) {
  json coords = json::array();
  for (const auto& p : points) coords.push_back({p.lon, p.lat});
  return json{{"type", "LineString"}, {"coordinates", coords}};
}

Feature slice_feature(const Slice& slice, const std::string& source_raster, std::size_t index) {
  Feature f;
  f.source_id = source_raster;
  f.index = index;
  f.geometry = line_geometry({slice.start_geo, slice.end_geo});
  f.properties = json{{"length_m", slice.length},
                      {"row_index", slice.row_index},
                      {"touching_start", slice.touching_start},
                      {"touching_end", slice.touching_end},
                      {"cover_ratio", slice.cover_ratio},
                      {"valid", slice.valid},
                      {"source_raster", source_raster}};
  return f;
}

Feature located_feature(const LocatedObject& obj, std::size_t index) {
  Feature f;
  f.source_id = obj.source_pano;
  f.index = index;
  f.geometry = point_geometry(obj.position);
  f.properties = json{{"class", obj.class_name},
                      {"d_hor_m", obj.d_hor},
                      {"d_hor_uncertainty_m", finite_or_null(obj.d_hor_uncertainty)},
                      {"h_b_m", obj.h_b},
                      {"bottom_above_ground_m", obj.bottom_above_ground},
                      {"azimuth_deg", obj.azimuth},
                      {"method", to_string(obj.method)},
                      {"source_pano", obj.source_pano},
                      {"n_observations", obj.n_observations}};
  return f;
}

LocatedObject located_from_feature(const json& feature) {
  const std::string where = "feature";
  if (!feature.contains("geometry") || !feature.contains("properties")) {
    throw Error(ErrorCode::Schema, where + ": missing geometry or properties");
  }
  const json& geom = feature.at("geometry");
  const json& props = feature.at("properties");
  if (geom.value("type", "") != "Point") throw Error(ErrorCode::Schema, where + ": expected Point geometry");
  const auto coords = require<std::vector<double>>(geom, "coordinates", where);
  if (coords.size() < 2) throw Error(ErrorCode::Schema, where + ": point needs lon, lat");
  LocatedObject obj;
  obj.position = GeoPoint{coords[1], coords[0], coords.size() > 2 ? coords[2] : 0.0};
  obj.class_name = require<std::string>(props, "class", where);
  obj.d_hor = require<double>(props, "d_hor_m", where);
  obj.d_hor_uncertainty = field_or<double>(props, "d_hor_uncertainty_m",
                                           std::numeric_limits<double>::infinity(), where);
  obj.h_b = require<double>(props, "h_b_m", where);
  obj.bottom_above_ground = field_or<double>(props, "bottom_above_ground_m", 0.0, where);
  obj.azimuth = require<double>(props, "azimuth_deg", where);
  obj.source_pano = require<std::string>(props, "source_pano", where);
  const std::string method = field_or<std::string>(props, "method", "tacheometry", where);
  obj.method = method == "triangulation" ? LocateMethod::Triangulation
               : method == "depth"       ? LocateMethod::Depth
                                         : LocateMethod::Tacheometry;
  obj.n_observations = field_or<int>(props, "n_observations", 1, where);
  return obj;
}

Feature tree_feature(const TriangulatedTree& tree, std::size_t index) {
  Feature f;
  f.source_id = "tree";
  f.index = index;
  f.geometry = point_geometry(tree.position);
  f.properties = json{{"diameter_m", tree.diameter},
                      {"mean_diameter_m", tree.mean_diameter},
                      {"per_image_diameters_m", tree.per_image_diameters},
                      {"n_pairs", tree.n_pairs},
                      {"theta_c_deg_min", tree.theta_c_min},
                      {"s_b_m", tree.s_b},
                      {"method", to_string(LocateMethod::Triangulation)}};
  return f;
}

json feature_collection(std::vector<Feature> features, const json& metadata) {
  std::stable_sort(features.begin(), features.end(), [](const Feature& a, const Feature& b) {
    return a.source_id != b.source_id ? a.source_id < b.source_id : a.index < b.index;
  });
  json arr = json::array();
  for (auto& f : features) {
    arr.push_back(json{{"type", "Feature"}, {"geometry", std::move(f.geometry)},
                       {"properties", std::move(f.properties)}});
  }
  return json{{"type", "FeatureCollection"}, {"features", std::move(arr)}, {"metadata", metadata}};
}

void write_geojson(std::vector<Feature> features, const json& metadata, const fs::path& path) {
  write_text_file(path, dump(feature_collection(std::move(features), metadata)));
}

json run_metadata(const json& resolved_config, const std::vector<fs::path>& inputs) {
  json hashes = json::object();
  for (const auto& p : inputs) hashes[p.filename().string()] = sha256_file(p);
  return json{{"tool_version", kToolVersion}, {"resolved_config", resolved_config},
              {"input_hashes", hashes}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace svim::io
