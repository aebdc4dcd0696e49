#include "svim/commands.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "svim/error.hpp"
#include "svim/io.hpp"
#include "svim/parallel.hpp"
#include "svim/synthetic.hpp"

namespace svim::cli {
namespace {

using io::json;


// Library errors raised while processing one item are recorded; anything else is fatal.
template <typename T>
bool absorb(const IndexedOutcome<T>& outcome, const std::string& item, RunSummary& summary) {
  if (!outcome.error) return true;
  try {
    std::rethrow_exception(outcome.error);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    ++summary.failed;
    summary.warnings.push_back(item + ": " + e.what());
  }
  return false;
}

std::map<std::string, PanoramaPose> index_poses(const std::vector<PanoramaPose>& poses) {
  std::map<std::string, PanoramaPose> by_id;
  for (const auto& p : poses) {
    if (!by_id.emplace(p.pano_id, p).second) {
      throw Error(ErrorCode::Schema, "duplicate pano_id '" + p.pano_id + "'");
    }
  }
  return by_id;
}

json filter_json(const SliceFilter& f) {
  json j{{"allowed_touching", f.allowed_touching}, {"min_cover_ratio", f.min_cover_ratio}};
  j["min_length_m"] = f.min_length_m ? json(*f.min_length_m) : json(nullptr);
  j["max_length_m"] = f.max_length_m ? json(*f.max_length_m) : json(nullptr);
  return j;
}

json layout_json(const ThumbnailLayout& l) {
  return json{{"width", l.width}, {"height", l.height}, {"hfov_deg", l.hfov}, {"pitch_deg", l.pitch}};
}

json pairing_json(const PairOptions& o) {
  return json{{"match_distance_m", o.match_distance_m}, {"thumbnails", layout_json(o.layout)}};
}

struct MatchedPair {
  StereoPair pair;
  std::string side;
  std::size_t obs_a = 0;
  std::size_t obs_b = 0;
};

std::vector<MatchedPair> find_pairs(const PairOptions& opts, RunSummary& summary) {
  if (!(opts.match_distance_m > 0.0)) throw Error(ErrorCode::Config, "match distance must be positive");
  std::vector<std::string> warnings;
  const auto poses = io::load_pano_metadata(opts.panos, &warnings);
  summary.warnings.insert(summary.warnings.end(), warnings.begin(), warnings.end());
  const auto by_id = index_poses(poses);
  const auto records = io::load_observations(opts.observations);

  std::vector<std::optional<TrunkObservation>> observations(records.size());
  std::map<std::string, std::vector<std::size_t>> obs_by_pano;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string item = "observation " + std::to_string(i);
    const auto it = by_id.find(records[i].pano_id);
    if (it == by_id.end()) {
      ++summary.failed;
      summary.warnings.push_back(item + ": unknown pano '" + records[i].pano_id + "'");
      continue;
    }
    try {
      TrunkObservation obs = io::resolve_observation(records[i], it->second);
      if (obs.depth_m) obs.coarse_position = locate_from_depth(obs, it->second);
      observations[i] = std::move(obs);
      obs_by_pano[records[i].pano_id].push_back(i);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Io) throw;
      ++summary.failed;
      summary.warnings.push_back(item + ": " + e.what());
    }
  }
  summary.items += records.size();

  // Consecutive capture positions within each sequence.
  std::map<std::string, std::vector<const PanoramaPose*>> sequences;
  for (const auto& p : poses) sequences[p.sequence_id].push_back(&p);
  std::vector<std::pair<const PanoramaPose*, const PanoramaPose*>> couples;
  for (auto& [id, seq] : sequences) {
    std::stable_sort(seq.begin(), seq.end(),
                     [](const auto* a, const auto* b) { return a->seq_index < b->seq_index; });
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      if (adjacent(*seq[i], *seq[i + 1])) couples.emplace_back(seq[i], seq[i + 1]);
    }
  }

  auto same_offset = [](double a, double b) { return std::abs(wrap180(a - b)) < 1e-9; };
  auto outcomes = parallel_map<std::vector<MatchedPair>>(couples.size(), opts.jobs, [&](std::size_t c) {
    const PanoramaPose& rear = *couples[c].first;
    const PanoramaPose& fwd = *couples[c].second;
    std::vector<MatchedPair> found;
    const auto rear_it = obs_by_pano.find(rear.pano_id);
    const auto fwd_it = obs_by_pano.find(fwd.pano_id);
    if (rear_it == obs_by_pano.end() || fwd_it == obs_by_pano.end()) return found;
    for (const ThumbnailPair& tp : candidate_pairs(rear, fwd, opts.layout)) {
      std::vector<std::size_t> idx_a, idx_b;
      std::vector<TrunkObservation> in_a, in_b;
      for (std::size_t i : rear_it->second) {
        if (!same_offset(observations[i]->thumbnail.heading_offset, tp.rear.heading_offset)) continue;
        idx_a.push_back(i);
        in_a.push_back(*observations[i]);
      }
      for (std::size_t j : fwd_it->second) {
        if (!same_offset(observations[j]->thumbnail.heading_offset, tp.forward.heading_offset)) continue;
        idx_b.push_back(j);
        in_b.push_back(*observations[j]);
      }
      for (const auto& [ia, ib] : match_observations(in_a, in_b, opts.match_distance_m)) {
        found.push_back({make_stereo_pair(rear, in_a[ia], fwd, in_b[ib]), tp.side, idx_a[ia], idx_b[ib]});
      }
    }
    return found;
  });

  std::vector<MatchedPair> pairs;
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    const std::string item = couples[c].first->pano_id + "/" + couples[c].second->pano_id;
    if (absorb(outcomes[c], item, summary)) {
      pairs.insert(pairs.end(), outcomes[c].value.begin(), outcomes[c].value.end());
    }
  }
  return pairs;
}

std::vector<fs::path> sorted_inputs(std::vector<fs::path> inputs) {
  std::sort(inputs.begin(), inputs.end());
  return inputs;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return kExitIo;
    case ErrorCode::Schema:
    case ErrorCode::Config:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidScene:
    case ErrorCode::InvalidCoordinate: return kExitSchema;
    default: return kExitDegenerate;
  }
}

RunSummary run_width(const WidthOptions& opts) {
  RunSummary summary;
  validate(opts.config);
  std::vector<LandCoverRaster> rasters;
  for (const auto& path : opts.rasters) rasters.push_back(io::load_landcover(path));
  summary.items = rasters.size();

  auto outcomes = parallel_map<std::vector<Slice>>(rasters.size(), opts.jobs, [&](std::size_t i) {
    return measure_widths(rasters[i], opts.config);
  });
  std::vector<io::Feature> features;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const std::string source = opts.rasters[i].filename().string();
    if (!absorb(outcomes[i], source, summary)) continue;
    const auto& slices = outcomes[i].value;
    for (std::size_t k = 0; k < slices.size(); ++k) {
      features.push_back(io::slice_feature(slices[k], source, k));
    }
  }

  std::vector<fs::path> inputs;
  for (const auto& r : opts.rasters) {
    inputs.push_back(r);
    inputs.push_back(fs::path(r).replace_extension(".json"));
  }
  const json config{{"command", "width"},
                    {"target_class", opts.config.target_class},
                    {"interval_m", opts.config.interval_m},
                    {"kernel_px", opts.config.kernel_px},
                    {"filter", filter_json(opts.config.filter)}};
  io::write_geojson(std::move(features), io::run_metadata(config, sorted_inputs(inputs)), opts.output);
  return summary;
}

RunSummary run_localize(const LocalizeOptions& opts) {
  RunSummary summary;
  if (!(opts.min_angular_height_deg > 0.0)) {
    throw Error(ErrorCode::Config, "min angular height must be positive");
  }
  const auto poses = io::load_pano_metadata(opts.panos, &summary.warnings);
  const auto by_id = index_poses(poses);
  const auto detections = io::load_detections(opts.detections);
  const DimensionRegistry registry = opts.registry ? io::load_registry(*opts.registry) : DimensionRegistry{};
  summary.items = detections.size();

  auto outcomes = parallel_map<LocatedObject>(detections.size(), opts.jobs, [&](std::size_t i) {
    const auto it = by_id.find(detections[i].pano_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::InvalidDetection, "unknown pano '" + detections[i].pano_id + "'");
    }
    return localize_detection(it->second, detections[i].detection, registry, opts.min_angular_height_deg);
  });
  std::vector<io::Feature> features;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (absorb(outcomes[i], "detection " + std::to_string(i), summary)) {
      features.push_back(io::located_feature(outcomes[i].value, i));
    }
  }

  std::vector<fs::path> inputs{opts.panos, opts.detections};
  if (opts.registry) inputs.push_back(*opts.registry);
  const json config{{"command", "localize"},
                    {"min_angular_height_deg", opts.min_angular_height_deg},
                    {"registry", registry.entries()}};
  io::write_geojson(std::move(features), io::run_metadata(config, sorted_inputs(inputs)), opts.output);
  return summary;
}

RunSummary run_merge(const MergeOptions& opts) {
  RunSummary summary;
  json collection;
  try {
    collection = json::parse(io::read_text_file(opts.input));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, opts.input.string() + ": " + e.what());
  }
  if (!collection.contains("features") || !collection.at("features").is_array()) {
    throw Error(ErrorCode::Schema, opts.input.string() + ": not a FeatureCollection");
  }
  std::vector<LocatedObject> objects;
  for (const json& f : collection.at("features")) objects.push_back(io::located_from_feature(f));
  summary.items = objects.size();

  const auto merged = merge_observations(objects, opts.radius_m);
  std::vector<io::Feature> features;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    io::Feature f = io::located_feature(merged[i], i);
    f.source_id.clear();  // keep cluster order
    features.push_back(std::move(f));
  }
  const json config{{"command", "merge"}, {"radius_m", opts.radius_m}};
  io::write_geojson(std::move(features), io::run_metadata(config, {opts.input}), opts.output);
  return summary;
}

RunSummary run_pair(const PairOptions& opts) {
  RunSummary summary;
  const auto pairs = find_pairs(opts, summary);
  std::vector<io::Feature> features;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const MatchedPair& m = pairs[i];
    io::Feature f;
    f.source_id = "";
    f.index = i;
    f.geometry = io::line_geometry({m.pair.pose_a.position, m.pair.pose_b.position});
    f.properties = json{{"pano_a", m.pair.pose_a.pano_id},
                        {"pano_b", m.pair.pose_b.pano_id},
                        {"side", m.side},
                        {"rear_offset_deg", m.pair.obs_a.thumbnail.heading_offset},
                        {"forward_offset_deg", m.pair.obs_b.thumbnail.heading_offset},
                        {"obs_a", m.obs_a},
                        {"obs_b", m.obs_b},
                        {"baseline_m", m.pair.baseline},
                        {"coarse_separation_m", horizontal_distance(*m.pair.obs_a.coarse_position,
                                                                    *m.pair.obs_b.coarse_position)}};
    features.push_back(std::move(f));
  }
  json config = pairing_json(opts);
  config["command"] = "pair";
  io::write_geojson(std::move(features),
                    io::run_metadata(config, sorted_inputs({opts.panos, opts.observations})), opts.output);
  return summary;
}

RunSummary run_diameter(const DiameterOptions& opts) {
  RunSummary summary;
  if (!(opts.min_theta_c_deg > 0.0 && opts.min_theta_c_deg < 90.0)) {
    throw Error(ErrorCode::Config, "min apex angle must lie in (0, 90) degrees");
  }
  if (!(opts.tree_radius_m > 0.0)) throw Error(ErrorCode::Config, "tree radius must be positive");
  const auto pairs = find_pairs(opts.pairing, summary);
  summary.items += pairs.size();

  auto outcomes = parallel_map<TriangulatedTree>(pairs.size(), opts.pairing.jobs, [&](std::size_t i) {
    return measure_pair(pairs[i].pair, opts.mode, opts.min_theta_c_deg);
  });
  std::vector<TriangulatedTree> measured;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const std::string item = "pair " + pairs[i].pair.pose_a.pano_id + "/" + pairs[i].pair.pose_b.pano_id +
                             " obs " + std::to_string(pairs[i].obs_a) + "/" + std::to_string(pairs[i].obs_b);
    if (absorb(outcomes[i], item, summary)) measured.push_back(outcomes[i].value);
  }

  // Pair measurements of one trunk land within the matching radius of each other.
  const std::size_t n = measured.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (horizontal_distance(measured[i].position, measured[j].position) <= opts.tree_radius_m) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::map<std::size_t, std::vector<TriangulatedTree>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(measured[i]);

  std::vector<io::Feature> features;
  std::size_t index = 0;
  for (const auto& [root, members] : groups) features.push_back(io::tree_feature(aggregate_tree(members), index++));

  json config = pairing_json(opts.pairing);
  config["command"] = "diameter";
  config["mode"] = opts.mode == DiameterMode::Tangent ? "tangent" : "exact-cylinder";
  config["min_theta_c_deg"] = opts.min_theta_c_deg;
  config["tree_radius_m"] = opts.tree_radius_m;
  io::write_geojson(std::move(features),
                    io::run_metadata(config, sorted_inputs({opts.pairing.panos, opts.pairing.observations})),
                    opts.pairing.output);
  return summary;
}

RunSummary run_synth(const SynthOptions& opts) {
  RunSummary summary;
  const SceneSpec scene = io::load_scene(opts.scene);
  const fs::path dir = opts.out_dir;

  io::write_pano_metadata(scene.cameras, dir / "panos.jsonl");
  ++summary.items;

  if (scene.landcover) {
    io::write_landcover(render_landcover(scene, *scene.landcover), dir / "landcover.pgm");
    ++summary.items;
  }

  std::vector<io::Feature> truth;
  if (!scene.billboards.empty()) {
    std::string text;
    for (const auto& d : synthesize_detections(scene)) text += io::detection_to_json(d.pano_id, d.detection).dump() + "\n";
    io::write_text_file(dir / "detections.jsonl", text);
    ++summary.items;
    for (std::size_t i = 0; i < scene.billboards.size(); ++i) {
      const Billboard& b = scene.billboards[i];
      truth.push_back({"billboard", i, io::point_geometry(b.position),
                       json{{"class", b.class_name}, {"bottom_height_m", b.bottom_height_m},
                            {"height_m", b.height_m}, {"width_m", b.width_m}}});
    }
  }
  if (!scene.cylinders.empty()) {
    std::string text;
    for (const auto& o : synthesize_trunk_observations(scene)) text += io::observation_to_json(o.observation).dump() + "\n";
    io::write_text_file(dir / "observations.jsonl", text);
    ++summary.items;
    for (std::size_t i = 0; i < scene.cylinders.size(); ++i) {
      const Cylinder& c = scene.cylinders[i];
      truth.push_back({"cylinder", i, io::point_geometry(c.position),
                       json{{"diameter_m", 2.0 * c.radius_m}, {"height_m", c.height_m}}});
    }
  }
  const json config{{"command", "synth"}, {"seed", scene.seed}};
  io::write_geojson(std::move(truth), io::run_metadata(config, {opts.scene}), dir / "truth.geojson");
  ++summary.items;
  return summary;
}

}  // namespace svim::cli
