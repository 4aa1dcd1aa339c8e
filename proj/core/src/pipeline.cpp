/* Copyright 2026 The focaldet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "focaldet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "focaldet/assignment.hpp"

namespace focaldet {

namespace {

using nlohmann::json;

constexpr std::uint64_t kFeatureSalt = 0xFEA7;
constexpr std::uint64_t kPhiSalt = 0x0F11;
constexpr std::uint64_t kAlignSalt = 0xA116;
constexpr std::uint64_t kQuerySalt = 0x06E5;
constexpr std::uint64_t kDecoderSalt = 0xDEC0;
constexpr std::uint64_t kScoreSalt = 0x5C0E;

double clamp_score(double v) { return std::min(std::max(v, kProbEpsilon), 1.0); }

struct ScoreKey {
  int camera;
  int row;
  int col;
  bool operator<(const ScoreKey& o) const {
    return std::tie(camera, row, col) < std::tie(o.camera, o.row, o.col);
  }
};

/// Reads Q and C from a token-table CSV (header must contain camera, row,
/// col, Q, C; extra columns are ignored).
void scores_from_file(const SceneConfig& cfg, const std::string& path,
                      Vector* q, Vector* c) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open score file '" + path + "'");
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) -> InputError {
    return InputError("score file '" + path + "' line " +
                      std::to_string(line_no) + ": " + why);
  };
  if (!std::getline(in, line)) throw fail("missing header");
  ++line_no;
  std::map<std::string, int> columns;
  {
    std::istringstream header(line);
    std::string name;
    int idx = 0;
    while (std::getline(header, name, ',')) columns[name] = idx++;
  }
  for (const char* needed : {"camera", "row", "col", "Q", "C"}) {
    if (!columns.count(needed)) {
      throw fail(std::string("missing column '") + needed + "'");
    }
  }

  std::map<ScoreKey, std::pair<double, double>> table;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row_stream(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(row_stream, cell, ',')) cells.push_back(cell);
    if (cells.size() < columns.size()) throw fail("too few columns");
    try {
      ScoreKey key{std::stoi(cells[static_cast<size_t>(columns["camera"])]),
                   std::stoi(cells[static_cast<size_t>(columns["row"])]),
                   std::stoi(cells[static_cast<size_t>(columns["col"])])};
      table[key] = {std::stod(cells[static_cast<size_t>(columns["Q"])]),
                    std::stod(cells[static_cast<size_t>(columns["C"])])};
    } catch (const std::exception&) {
      throw fail("unparsable numeric cell");
    }
  }

  const size_t total = static_cast<size_t>(cfg.total_tokens());
  q->assign(total, 0.0);
  c->assign(total, 0.0);
  for (int cam = 0; cam < cfg.cameras; ++cam) {
    for (int row = 0; row < cfg.grid_h(); ++row) {
      for (int col = 0; col < cfg.grid_w(); ++col) {
        const auto it = table.find(ScoreKey{cam, row, col});
        if (it == table.end()) {
          throw InputError("score file '" + path + "': missing token (" +
                           std::to_string(cam) + ", " + std::to_string(row) +
                           ", " + std::to_string(col) + ")");
        }
        const size_t flat =
            static_cast<size_t>(cam) * cfg.tokens_per_camera() +
            static_cast<size_t>(row) * cfg.grid_w() + static_cast<size_t>(col);
        (*q)[flat] = clamp_score(it->second.first);
        (*c)[flat] = clamp_score(it->second.second);
      }
    }
  }
}

}  // namespace

ScoreSource parse_score_source(const std::string& spec,
                               std::string* file_path) {
  if (spec == "oracle") return ScoreSource::kOracle;
  if (spec == "random") return ScoreSource::kRandom;
  if (spec.rfind("file:", 0) == 0) {
    if (file_path != nullptr) *file_path = spec.substr(5);
    return ScoreSource::kFile;
  }
  throw InputError("unknown score source '" + spec +
                   "' (expected oracle, random, or file:<path>)");
}

std::vector<TokenGrid> make_token_grids(const SceneConfig& cfg) {
  std::vector<TokenGrid> grids;
  grids.reserve(static_cast<size_t>(cfg.cameras));
  const Rng base(cfg.seed);
  for (int cam = 0; cam < cfg.cameras; ++cam) {
    Rng rng = base.fork(kFeatureSalt + static_cast<std::uint64_t>(cam));
    DenseMatrix features(cfg.tokens_per_camera(), cfg.d_model);
    for (double& v : features.data()) v = rng.uniform(-1.0, 1.0);
    grids.emplace_back(cam, cfg.grid_w(), cfg.grid_h(), cfg.stride_px,
                       std::move(features));
  }
  return grids;
}

Mlp2 pipeline_phi(const SceneConfig& cfg) {
  Rng phi_rng = Rng(cfg.seed).fork(kPhiSalt);
  return Mlp2::seeded(3 * (cfg.lid_bins + 1), cfg.phi_hidden, cfg.d_model,
                      phi_rng);
}

void oracle_scores(const TokenTargets& targets, Vector* q, Vector* c) {
  const size_t count = targets.quality_y.size();
  q->resize(count);
  c->resize(count);
  for (size_t i = 0; i < count; ++i) {
    (*q)[i] = clamp_score(targets.quality_y[i]);
    (*c)[i] = clamp_score(targets.heatmap[i]);
  }
}

namespace {

/// Losses of oracle-perfect predictions: exact boxes and offsets, quality
/// predictions equal to their targets, and a centerness prediction that is
/// the heatmap's peak indicator (the exact minimizer of the centerness
/// loss). Exercises the matcher on per-camera perfect 2D predictions.
void oracle_loss_block(const SceneConfig& cfg,
                       const std::vector<CameraTruth>& truths,
                       PipelineResult* out) {
  AuxComponents comp;
  Vector peak_c;
  Vector pooled_h;
  int n_pos = 0;
  for (const CameraTruth& truth : truths) {
    const TokenTargets& t = truth.targets;
    for (size_t i = 0; i < t.quality_y.size(); ++i) {
      comp.quality +=
          quality_focal_loss(t.quality_y[i], t.quality_y[i], cfg.quality_beta)
              .loss;
      peak_c.push_back(t.heatmap[i] >= 1.0 ? 1.0 : 0.0);
      pooled_h.push_back(t.heatmap[i]);
      if (t.class_id[i] >= 0) {
        const LtrbTarget& l = t.ltrb[i];
        const double pred[4] = {l.l, l.t, l.r, l.b};
        const double target[4] = {l.l, l.t, l.r, l.b};
        comp.ltrb += l1_loss(pred, target).loss;
      }
    }
    for (const CenterOffset& off : t.center_offsets) {
      const double pred[2] = {off.du, off.dv};
      const double target[2] = {off.du, off.dv};
      comp.center_offset += l1_loss(pred, target).loss;
    }
    n_pos += static_cast<int>(truth.instances.size());

    if (!truth.instances.empty()) {
      std::vector<Prediction2D> preds;
      std::vector<GroundTruth2D> gts;
      for (const VisibleInstance& vi : truth.instances) {
        Vector scores(static_cast<size_t>(cfg.n_classes), 0.0);
        scores[static_cast<size_t>(vi.class_id)] = 1.0;
        preds.push_back({vi.box_px, std::move(scores)});
        gts.push_back({vi.box_px, vi.class_id});
      }
      const CostMatrix costs =
          build_cost_matrix(preds, gts, CostWeights{},
                            cfg.image_width_px, cfg.image_height_px);
      const Assignment match = match_hungarian(costs);
      for (size_t col = 0; col < gts.size(); ++col) {
        const int row = match.row_of_col[col];
        comp.giou +=
            1.0 -
            giou_2d(preds[static_cast<size_t>(row)].box, gts[col].box).value;
      }
    }
  }
  comp.centerness =
      centerness_focal_loss(peak_c, pooled_h, cfg.centerness_a,
                            cfg.centerness_b)
          .loss;
  out->oracle_components = comp;
  out->n_pos = n_pos;
  out->oracle_total =
      auxiliary_loss_total(comp, AuxWeights{}, n_pos, &out->warnings);
}

std::vector<size_t> select_tokens(const SceneConfig& cfg,
                                  const QualityMaps& maps) {
  if (!cfg.per_camera_selection) {
    return select_top_ratio(maps.p, cfg.rho);
  }
  std::vector<size_t> sampled;
  const size_t per_cam = static_cast<size_t>(cfg.tokens_per_camera());
  for (int cam = 0; cam < cfg.cameras; ++cam) {
    const std::span<const double> slice(maps.p.data() + per_cam * cam,
                                        per_cam);
    for (size_t idx : select_top_ratio(slice, cfg.rho)) {
      sampled.push_back(per_cam * static_cast<size_t>(cam) + idx);
    }
  }
  return sampled;
}

}  // namespace

PipelineResult run_pipeline(const SyntheticScene& scene,
                            const RunOptions& options) {
  const SceneConfig& cfg = scene.config;
  cfg.validate();
  require(static_cast<int>(scene.cameras.size()) == cfg.cameras,
          "run_pipeline: scene camera count disagrees with its config");
  for (const CameraModel& cam : scene.cameras) {
    require(cam.width_px == cfg.image_width_px &&
                cam.height_px == cfg.image_height_px,
            "run_pipeline: camera image dims disagree with the config");
  }

  PipelineResult out;
  out.scene = scene;
  out.options = options;
  out.truths = render_targets(scene);

  // Score maps, pooled over cameras.
  Vector q_pool;
  Vector c_pool;
  switch (options.score_source) {
    case ScoreSource::kOracle: {
      for (const CameraTruth& truth : out.truths) {
        Vector q, c;
        oracle_scores(truth.targets, &q, &c);
        q_pool.insert(q_pool.end(), q.begin(), q.end());
        c_pool.insert(c_pool.end(), c.begin(), c.end());
      }
      break;
    }
    case ScoreSource::kRandom: {
      Rng rng = Rng(cfg.seed).fork(kScoreSalt);
      q_pool.resize(static_cast<size_t>(cfg.total_tokens()));
      c_pool.resize(static_cast<size_t>(cfg.total_tokens()));
      for (double& v : q_pool) v = rng.uniform(kProbEpsilon, 1.0);
      for (double& v : c_pool) v = rng.uniform(kProbEpsilon, 1.0);
      break;
    }
    case ScoreSource::kFile:
      scores_from_file(cfg, options.score_file, &q_pool, &c_pool);
      break;
  }
  out.maps = build_quality_maps(std::move(q_pool), std::move(c_pool),
                                cfg.alpha);

  out.sampled = select_tokens(cfg, out.maps);
  mark_sampled(out.maps, out.sampled);

  // Foreground recall over the tokens holding projected 2.5D centers.
  for (int cam = 0; cam < cfg.cameras; ++cam) {
    for (size_t token : out.truths[static_cast<size_t>(cam)]
             .targets.center_tokens) {
      out.center_tokens.push_back(
          static_cast<size_t>(cam) * cfg.tokens_per_camera() + token);
    }
  }
  std::sort(out.center_tokens.begin(), out.center_tokens.end());
  out.center_tokens.erase(
      std::unique(out.center_tokens.begin(), out.center_tokens.end()),
      out.center_tokens.end());
  if (!out.center_tokens.empty()) {
    size_t hit = 0;
    for (size_t token : out.center_tokens) {
      hit += std::binary_search(out.sampled.begin(), out.sampled.end(), token)
                 ? 1
                 : 0;
    }
    out.foreground_recall =
        static_cast<double>(hit) / static_cast<double>(out.center_tokens.size());
  }

  // Key/value composition over the sampled tokens.
  const std::vector<TokenGrid> grids = make_token_grids(cfg);
  const Rng base(cfg.seed);
  const Mlp2 phi = pipeline_phi(cfg);
  const AlignmentContent content =
      parse_alignment_content(cfg.alignment_content);
  AlignmentNet align_net = [&] {
    if (cfg.alignment_init == "identity") {
      return AlignmentNet::identity(content, cfg.phi_hidden, cfg.d_model);
    }
    Rng align_rng = base.fork(kAlignSalt);
    return AlignmentNet::seeded(content, cfg.phi_hidden, cfg.d_model,
                                align_rng);
  }();

  const Roi3D roi = cfg.roi();
  const LidConfig lid = cfg.lid();
  std::vector<KeyValue> per_camera_kv;
  per_camera_kv.reserve(grids.size());
  for (int cam = 0; cam < cfg.cameras; ++cam) {
    const TokenGrid& grid = grids[static_cast<size_t>(cam)];
    const CameraModel& camera = scene.cameras[static_cast<size_t>(cam)];
    const PosEmbedGrid embed =
        position_embedding(grid, camera, phi, lid, roi);
    if (options.mode == ComposeMode::kFocal) {
      std::vector<ConeParams> cones;
      cones.reserve(static_cast<size_t>(grid.token_count()));
      for (int row = 0; row < grid.height; ++row) {
        for (int col = 0; col < grid.width; ++col) {
          const auto [u, v] = grid.pixel_center(row, col);
          cones.push_back(frustum_cone(camera, u, v, cfg.stride_px));
        }
      }
      const TokenGrid aligned = spatial_align(grid, cones, align_net);
      per_camera_kv.push_back(
          compose_key_value(aligned, embed, options.mode));
    } else {
      per_camera_kv.push_back(compose_key_value(grid, embed, options.mode));
    }
  }

  const int n_sampled = static_cast<int>(out.sampled.size());
  DenseMatrix keys(n_sampled, cfg.d_model);
  DenseMatrix values(n_sampled, cfg.d_model);
  const size_t per_cam = static_cast<size_t>(cfg.tokens_per_camera());
  for (int i = 0; i < n_sampled; ++i) {
    const size_t flat = out.sampled[static_cast<size_t>(i)];
    const size_t cam = flat / per_cam;
    const int local = static_cast<int>(flat % per_cam);
    for (int k = 0; k < cfg.d_model; ++k) {
      keys.at(i, k) = per_camera_kv[cam].keys.at(local, k);
      values.at(i, k) = per_camera_kv[cam].values.at(local, k);
    }
  }
  out.kv = {std::move(keys), std::move(values)};

  // Decode.
  const AnchorQuerySet queries = init_anchor_queries(
      cfg.queries, cfg.d_model, base.fork(kQuerySalt).seed());
  DecoderConfig dec_cfg;
  dec_cfg.layers = cfg.decoder_layers;
  dec_cfg.self_attention = cfg.self_attention;
  dec_cfg.scale_scores = cfg.scale_scores;
  dec_cfg.n_classes = cfg.n_classes;
  dec_cfg.roi = roi;
  const DecoderWeights weights = DecoderWeights::seeded(
      dec_cfg, cfg.d_model, cfg.ffn_hidden, base.fork(kDecoderSalt).seed());
  out.trace = decode(queries, out.kv.keys, out.kv.values, dec_cfg, weights);

  // Loss evaluation.
  oracle_loss_block(cfg, out.truths, &out);
  double score_quality = 0.0;
  Vector pooled_h;
  for (const CameraTruth& truth : out.truths) {
    pooled_h.insert(pooled_h.end(), truth.targets.heatmap.begin(),
                    truth.targets.heatmap.end());
  }
  for (size_t i = 0; i < out.maps.q.size(); ++i) {
    size_t cam = i / per_cam;
    size_t local = i % per_cam;
    const double y = out.truths[cam].targets.quality_y[local];
    score_quality +=
        quality_focal_loss(out.maps.q[i], y, cfg.quality_beta).loss;
  }
  out.score_quality_loss = score_quality;
  out.score_centerness_loss =
      centerness_focal_loss(out.maps.c, pooled_h, cfg.centerness_a,
                            cfg.centerness_b)
          .loss;

  // Cost table for this configuration.
  HeadConfig head;
  head.n_queries = cfg.queries;
  head.n_tokens = cfg.total_tokens();
  head.d_model = cfg.d_model;
  head.d_ff = cfg.ffn_hidden;
  head.layers = cfg.decoder_layers;
  head.rho = cfg.rho;
  out.cost_rows = ratio_sweep(head, {0.25, 0.5, 0.75, 1.0});
  return out;
}

PipelineResult run_pipeline(const SceneConfig& cfg,
                            const RunOptions& options) {
  return run_pipeline(generate_scene(cfg), options);
}

std::string PipelineResult::to_report_json() const {
  json j;
  j["format"] = "focaldet-report-v1";
  j["config"] = json::parse(scene.config.to_json_text());
  j["mode"] =
      options.mode == ComposeMode::kPetr ? "petr" : "focal";
  switch (options.score_source) {
    case ScoreSource::kOracle: j["score_source"] = "oracle"; break;
    case ScoreSource::kRandom: j["score_source"] = "random"; break;
    case ScoreSource::kFile:
      j["score_source"] = "file:" + options.score_file;
      break;
  }

  j["tokens"]["total"] = scene.config.total_tokens();
  j["tokens"]["per_camera"] = scene.config.tokens_per_camera();
  j["tokens"]["sampled"] = sampled.size();
  j["tokens"]["sampled_indices"] = sampled;
  j["tokens"]["center_tokens"] = center_tokens;
  j["foreground_recall"] = foreground_recall;

  j["losses_oracle"] = {{"quality", oracle_components.quality},
                        {"center_offset_l1", oracle_components.center_offset},
                        {"giou", oracle_components.giou},
                        {"ltrb_l1", oracle_components.ltrb},
                        {"centerness", oracle_components.centerness},
                        {"total", oracle_total},
                        {"n_pos", n_pos}};
  j["losses_scores"] = {{"quality", score_quality_loss},
                        {"centerness", score_centerness_loss}};

  json cost = json::array();
  for (const SweepRow& row : cost_rows) {
    cost.push_back({{"ratio", row.rho},
                    {"sampled_tokens", row.sampled},
                    {"flops_total", row.flops.total},
                    {"flops_cross_attn", row.flops.cross_attn},
                    {"mem_total_bytes", row.memory.total},
                    {"mem_attn_bytes", row.memory.attn_matrices},
                    {"delta_flops_pct", row.delta_flops_pct},
                    {"delta_mem_pct", row.delta_mem_pct}});
  }
  j["cost_model"]["rows"] = cost;
  j["cost_model"]["note"] =
      "MAC = 2 FLOPs; deltas are relative to the rho = 1.0 row";

  json layers = json::array();
  for (const LayerTrace& layer : trace.layers) {
    json preds = json::array();
    for (const Box3DPrediction& p : layer.predictions) {
      int best = 0;
      for (size_t k = 1; k < p.class_logits.size(); ++k) {
        if (p.class_logits[k] > p.class_logits[static_cast<size_t>(best)]) {
          best = static_cast<int>(k);
        }
      }
      preds.push_back(
          {{"center_m", {p.center_m.x, p.center_m.y, p.center_m.z}},
           {"size_m", {p.size_m.x, p.size_m.y, p.size_m.z}},
           {"yaw_rad", p.yaw_rad},
           {"class_id", best},
           {"class_logit", p.class_logits[static_cast<size_t>(best)]}});
    }
    layers.push_back({{"predictions", preds}});
  }
  j["layers"] = layers;
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

}  // namespace focaldet
