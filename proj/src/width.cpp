#include "svim/width.hpp"

#include <algorithm>
#include <cmath>

#include "svim/error.hpp"

namespace svim {

void validate(const LandCoverRaster& raster) {
  if (!(raster.resolution > 0.0) || !std::isfinite(raster.resolution)) {
    throw Error(ErrorCode::Config, "raster resolution must be positive");
  }
  if (raster.grid.width() <= 0 || raster.grid.height() <= 0) {
    throw Error(ErrorCode::Config, "raster has no pixels");
  }
  validate(raster.center);
  if (raster.class_table.count(kNoDataClass) != 0) {
    throw Error(ErrorCode::Config, "class id 255 is reserved for no-data");
  }
  std::vector<bool> seen(256, false);
  for (std::uint8_t v : raster.grid.data()) seen[v] = true;
  for (int id = 0; id < 256; ++id) {
    if (seen[id] && raster.class_table.count(static_cast<std::uint8_t>(id)) == 0) {
      throw Error(ErrorCode::Config, "class id " + std::to_string(id) + " missing from class table");
    }
  }
}

std::uint8_t class_id(const LandCoverRaster& raster, const std::string& name) {
  for (const auto& [id, n] : raster.class_table) {
    if (n == name) return id;
  }
  throw Error(ErrorCode::Config, "unknown class '" + name + "'");
}

RotationTransform::RotationTransform(double heading, int src_width, int src_height)
    : heading_(normalize_deg(heading)), src_w_(src_width), src_h_(src_height) {
  // Quarter turns are kept exact so they map pixel centers onto pixel centers.
  const double quarter = heading_ / 90.0;
  if (quarter == std::floor(quarter)) {
    static constexpr double kCos[] = {1.0, 0.0, -1.0, 0.0};
    static constexpr double kSin[] = {0.0, 1.0, 0.0, -1.0};
    const int q = static_cast<int>(quarter) % 4;
    cos_ = kCos[q];
    sin_ = kSin[q];
  } else {
    cos_ = std::cos(deg2rad(heading_));
    sin_ = std::sin(deg2rad(heading_));
  }
  const double ac = std::abs(cos_);
  const double as = std::abs(sin_);
  dst_w_ = static_cast<int>(std::ceil(src_w_ * ac + src_h_ * as - 1e-9));
  dst_h_ = static_cast<int>(std::ceil(src_w_ * as + src_h_ * ac - 1e-9));
}

RasterPoint RotationTransform::to_rotated(const RasterPoint& src) const {
  const double px = src.x - src_w_ / 2.0;
  const double py = src_h_ / 2.0 - src.y;
  const double qx = px * cos_ - py * sin_;
  const double qy = px * sin_ + py * cos_;
  return RasterPoint{qx + dst_w_ / 2.0, dst_h_ / 2.0 - qy};
}

RasterPoint RotationTransform::to_source(const RasterPoint& dst) const {
  const double qx = dst.x - dst_w_ / 2.0;
  const double qy = dst_h_ / 2.0 - dst.y;
  const double px = qx * cos_ + qy * sin_;
  const double py = -qx * sin_ + qy * cos_;
  return RasterPoint{px + src_w_ / 2.0, src_h_ / 2.0 - py};
}

RotatedRaster rotate_to_heading(const LandCoverRaster& raster) {
  RotatedRaster out;
  out.transform = RotationTransform(raster.heading, raster.grid.width(), raster.grid.height());
  const int w = out.transform.rotated_width();
  const int h = out.transform.rotated_height();
  out.grid = ClassRaster(w, h, kNoDataClass);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const RasterPoint s = out.transform.to_source({col + 0.5, row + 0.5});
      const int sc = static_cast<int>(std::floor(s.x));
      const int sr = static_cast<int>(std::floor(s.y));
      if (raster.grid.contains(sc, sr)) out.grid(col, row) = raster.grid(sc, sr);
    }
  }
  return out;
}

BinaryRaster binarize(const ClassRaster& grid, std::uint8_t target) {
  BinaryRaster b(grid.width(), grid.height(), 0);
  std::transform(grid.data().begin(), grid.data().end(), b.data().begin(),
                 [target](std::uint8_t v) { return static_cast<std::uint8_t>(v == target); });
  return b;
}

BinaryRaster binarize(const ClassRaster& grid, const LandCoverRaster& raster,
                      const std::string& target_class) {
  return binarize(grid, class_id(raster, target_class));
}

namespace {

void check_kernel(int kernel_px) {
  if (kernel_px < 1 || kernel_px % 2 == 0) {
    throw Error(ErrorCode::Config, "morphology kernel must be odd and >= 1, got " +
                                       std::to_string(kernel_px));
  }
}

// Separable min (erode) or max (dilate) over a clipped square window.
BinaryRaster square_filter(const BinaryRaster& b, int kernel_px, bool take_max) {
  check_kernel(kernel_px);
  const int r = kernel_px / 2;
  const int w = b.width();
  const int h = b.height();
  BinaryRaster tmp(w, h, 0);
  BinaryRaster out(w, h, 0);
  const std::uint8_t hit = take_max ? 1 : 0;
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      std::uint8_t v = take_max ? 0 : 1;
      for (int c = std::max(0, col - r); c <= std::min(w - 1, col + r); ++c) {
        if (b(c, row) == hit) {
          v = hit;
          break;
        }
      }
      tmp(col, row) = v;
    }
  }
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      std::uint8_t v = take_max ? 0 : 1;
      for (int rr = std::max(0, row - r); rr <= std::min(h - 1, row + r); ++rr) {
        if (tmp(col, rr) == hit) {
          v = hit;
          break;
        }
      }
      out(col, row) = v;
    }
  }
  return out;
}

}  // namespace

BinaryRaster erode(const BinaryRaster& b, int kernel_px) { return square_filter(b, kernel_px, false); }

BinaryRaster dilate(const BinaryRaster& b, int kernel_px) { return square_filter(b, kernel_px, true); }

BinaryRaster morph_open_close(const BinaryRaster& b, int kernel_px) {
  check_kernel(kernel_px);
  if (kernel_px == 1) return b;
  const BinaryRaster opened = dilate(erode(b, kernel_px), kernel_px);
  return erode(dilate(opened, kernel_px), kernel_px);
}

int scanline_stride(double interval_m, double resolution) {
  if (!(interval_m > 0.0)) throw Error(ErrorCode::Config, "scanline interval must be positive");
  if (!(resolution > 0.0)) throw Error(ErrorCode::Config, "resolution must be positive");
  return std::max(1, static_cast<int>(std::lround(interval_m / resolution)));
}

std::vector<Run> scanline_slices(const BinaryRaster& b, double interval_m, double resolution) {
  const int stride = scanline_stride(interval_m, resolution);
  std::vector<Run> runs;
  for (int row = 0; row < b.height(); row += stride) {
    int col = 0;
    while (col < b.width()) {
      if (b(col, row) == 0) {
        ++col;
        continue;
      }
      const int start = col;
      while (col < b.width() && b(col, row) != 0) ++col;
      runs.push_back(Run{row, start, col - 1});
    }
  }
  return runs;
}

namespace {

std::string touching_class(const ClassRaster& grid, int col, int row,
                           const std::map<std::uint8_t, std::string>& class_table) {
  if (!grid.contains(col, row)) return kEdgeClass;
  const std::uint8_t v = grid(col, row);
  if (v == kNoDataClass) return kEdgeClass;
  const auto it = class_table.find(v);
  return it == class_table.end() ? std::to_string(v) : it->second;
}

}  // namespace

SliceAttributes slice_attributes(const Run& run, const ClassRaster& rotated, std::uint8_t target,
                                 const std::map<std::uint8_t, std::string>& class_table) {
  SliceAttributes attrs;
  attrs.touching_start = touching_class(rotated, run.col_start - 1, run.row, class_table);
  attrs.touching_end = touching_class(rotated, run.col_end + 1, run.row, class_table);

  const int side = run.length_px();
  const int row_lo = std::max(0, run.row - (side - 1) / 2);
  const int row_hi = std::min(rotated.height() - 1, run.row - (side - 1) / 2 + side - 1);
  const int col_lo = std::max(0, run.col_start);
  const int col_hi = std::min(rotated.width() - 1, run.col_end);
  long total = 0;
  long hits = 0;
  for (int r = row_lo; r <= row_hi; ++r) {
    for (int c = col_lo; c <= col_hi; ++c) {
      ++total;
      hits += rotated(c, r) == target ? 1 : 0;
    }
  }
  attrs.cover_ratio = total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
  return attrs;
}

std::vector<Slice> finalize_slices(const std::vector<RunWithAttributes>& runs,
                                   const RotationTransform& transform, const LandCoverRaster& raster,
                                   const std::string& target_class, const SliceFilter& filter) {
  const double w = raster.grid.width();
  const double h = raster.grid.height();
  const double res = raster.resolution;
  auto to_local = [&](const RasterPoint& p) {
    const RasterPoint s = transform.to_source(p);
    return LocalPoint{(s.x - w / 2.0) * res, (h / 2.0 - s.y) * res, 0.0};
  };
  auto allowed = [&](const std::string& name) {
    return name == target_class || filter.allowed_touching.count(name) != 0;
  };

  std::vector<Slice> slices;
  slices.reserve(runs.size());
  for (const auto& [run, attrs] : runs) {
    Slice s;
    const double y = run.row + 0.5;
    s.start = to_local({static_cast<double>(run.col_start), y});
    s.end = to_local({static_cast<double>(run.col_end + 1), y});
    s.start_geo = local_to_geo(s.start, raster.center);
    s.end_geo = local_to_geo(s.end, raster.center);
    s.length = run.length_px() * res;
    s.row_index = run.row;
    s.touching_start = attrs.touching_start;
    s.touching_end = attrs.touching_end;
    s.cover_ratio = attrs.cover_ratio;
    s.valid = attrs.cover_ratio > filter.min_cover_ratio && allowed(attrs.touching_start) &&
              allowed(attrs.touching_end);
    if (filter.min_length_m && s.length < *filter.min_length_m) s.valid = false;
    if (filter.max_length_m && s.length > *filter.max_length_m) s.valid = false;
    slices.push_back(std::move(s));
  }
  return slices;
}

void validate(const WidthConfig& config) {
  if (!(config.interval_m > 0.0)) throw Error(ErrorCode::Config, "scanline interval must be positive");
  if (config.kernel_px < 1 || config.kernel_px % 2 == 0) {
    throw Error(ErrorCode::Config,
                "morphology kernel must be odd and >= 1, got " + std::to_string(config.kernel_px));
  }
  const SliceFilter& f = config.filter;
  if (!(f.min_cover_ratio >= 0.0 && f.min_cover_ratio <= 1.0)) {
    throw Error(ErrorCode::Config, "min cover ratio must lie in [0, 1]");
  }
  if (f.min_length_m && f.max_length_m && *f.min_length_m > *f.max_length_m) {
    throw Error(ErrorCode::Config, "min length exceeds max length");
  }
}

std::vector<Slice> measure_widths(const LandCoverRaster& raster, const WidthConfig& config) {
  validate(config);
  validate(raster);
  const std::uint8_t target = class_id(raster, config.target_class);
  const RotatedRaster rotated = rotate_to_heading(raster);
  const BinaryRaster cleaned = morph_open_close(binarize(rotated.grid, target), config.kernel_px);
  const std::vector<Run> runs = scanline_slices(cleaned, config.interval_m, raster.resolution);
  std::vector<RunWithAttributes> attributed;
  attributed.reserve(runs.size());
  for (const Run& run : runs) {
    attributed.push_back({run, slice_attributes(run, rotated.grid, target, raster.class_table)});
  }
  return finalize_slices(attributed, rotated.transform, raster, config.target_class, config.filter);
}

}  // namespace svim
