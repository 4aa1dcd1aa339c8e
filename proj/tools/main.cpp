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

// Command-line front end: gen, targets, run, sweep, dump-maps.
// Exit codes: 0 success, 1 input error, 2 contract violation.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "focaldet/cost_model.hpp"
#include "focaldet/io.hpp"
#include "focaldet/pipeline.hpp"
#include "focaldet/scene.hpp"

namespace {

using namespace focaldet;

std::vector<double> parse_ratio_list(const std::string& spec) {
  std::vector<double> ratios;
  std::istringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      ratios.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InputError("unparsable ratio '" + item + "' in '" + spec + "'");
    }
  }
  if (ratios.empty()) throw InputError("empty ratio list");
  return ratios;
}

struct CommonArgs {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::optional<double> rho;
  std::optional<double> alpha;

  void apply(SceneConfig* cfg) const {
    if (!config_path.empty()) {
      cfg->apply_json_text(read_text_file(config_path));
    }
    if (seed) cfg->seed = *seed;
    if (rho) cfg->rho = *rho;
    if (alpha) cfg->alpha = *alpha;
  }
};

void add_common(CLI::App* cmd, CommonArgs* args, bool with_scores = false,
                std::string* scores = nullptr) {
  cmd->add_option("--seed", args->seed, "Scene seed");
  cmd->add_option("--config", args->config_path,
                  "JSON file overriding config fields");
  cmd->add_option("--rho", args->rho, "Sampling ratio in (0,1]");
  cmd->add_option("--alpha", args->alpha, "Priority balance in [0,1]");
  if (with_scores) {
    cmd->add_option("--scores", *scores,
                    "Score source: oracle, random, or file:<path>");
  }
}

SyntheticScene scene_for(const std::string& scene_path,
                         const CommonArgs& args) {
  if (!scene_path.empty()) {
    SyntheticScene scene = load_scene_file(scene_path);
    // A --config file overrides the scene's stored config; explicit flags
    // override both.
    args.apply(&scene.config);
    scene.config.validate();
    return scene;
  }
  SceneConfig cfg;
  args.apply(&cfg);
  return generate_scene(cfg);
}

RunOptions options_for(const std::string& mode, const std::string& scores) {
  RunOptions options;
  options.mode = parse_compose_mode(mode);
  options.score_source = parse_score_source(scores, &options.score_file);
  return options;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"focaldet: focal token sampling detection head toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic scene file");
  CommonArgs gen_args;
  std::string gen_out;
  add_common(gen, &gen_args);
  gen->add_option("--out", gen_out, "Output scene JSON path")->required();

  // targets
  auto* targets =
      app.add_subcommand("targets", "Render targets to a token-table CSV");
  CommonArgs targets_args;
  std::string targets_scene, targets_scores = "oracle", targets_out;
  add_common(targets, &targets_args, true, &targets_scores);
  targets->add_option("--scene", targets_scene, "Scene JSON path")->required();
  targets->add_option("--out", targets_out, "Output CSV path")->required();

  // run
  auto* run = app.add_subcommand("run", "Run the full forward pipeline");
  CommonArgs run_args;
  std::string run_scene, run_mode = "focal", run_scores = "oracle";
  std::string run_out, run_dump_attn;
  add_common(run, &run_args, true, &run_scores);
  run->add_option("--scene", run_scene,
                  "Scene JSON path (generated from config when omitted)");
  run->add_option("--mode", run_mode, "Composition mode: petr or focal");
  run->add_option("--out", run_out, "Report JSON path (stdout when omitted)");
  run->add_option("--dump-attn", run_dump_attn,
                  "Directory for per-layer attention PGMs");

  // sweep
  auto* sweep =
      app.add_subcommand("sweep", "Analytic FLOPs/memory ratio sweep");
  std::string sweep_ratios = "0.25,0.5,0.75,1.0", sweep_out;
  HeadConfig head = reference_head_config();
  sweep->add_option("--ratios", sweep_ratios, "Comma-separated ratios");
  sweep->add_option("--queries", head.n_queries, "Query count");
  sweep->add_option("--tokens", head.n_tokens, "Pre-sampling token count");
  sweep->add_option("--dmodel", head.d_model, "Model width");
  sweep->add_option("--dff", head.d_ff, "Feed-forward width");
  sweep->add_option("--layers", head.layers, "Decoder layers");
  sweep->add_option("--bytes", head.bytes_per_scalar, "Bytes per scalar");
  sweep->add_option("--out", sweep_out, "CSV output path");

  // dump-maps
  auto* dump_maps =
      app.add_subcommand("dump-maps", "Write Q/C/P/H maps as PGM images");
  CommonArgs dump_args;
  std::string dump_scene, dump_scores = "oracle", dump_out;
  add_common(dump_maps, &dump_args, true, &dump_scores);
  dump_maps->add_option("--scene", dump_scene, "Scene JSON path")->required();
  dump_maps->add_option("--out", dump_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (gen->parsed()) {
    SceneConfig cfg;
    gen_args.apply(&cfg);
    save_scene_file(generate_scene(cfg), gen_out);
    std::cout << "wrote " << gen_out << "\n";
    return 0;
  }

  if (targets->parsed()) {
    const SyntheticScene scene = scene_for(targets_scene, targets_args);
    const PipelineResult result =
        run_pipeline(scene, options_for("focal", targets_scores));
    write_text_file(targets_out,
                    token_table_csv(scene.config, result.truths, result.maps));
    std::cout << "wrote " << targets_out << "\n";
    return 0;
  }

  if (run->parsed()) {
    const RunOptions options = options_for(run_mode, run_scores);
    const SyntheticScene scene = scene_for(run_scene, run_args);
    const PipelineResult result = run_pipeline(scene, options);
    const std::string report = result.to_report_json();
    if (run_out.empty()) {
      std::cout << report;
    } else {
      write_text_file(run_out, report);
      std::cout << "wrote " << run_out << "\n";
    }
    if (!run_dump_attn.empty()) {
      const auto paths = dump_attention_maps(result.trace, run_dump_attn);
      std::cout << "wrote " << paths.size() << " attention maps under "
                << run_dump_attn << "\n";
    }
    return 0;
  }

  if (sweep->parsed()) {
    const std::vector<SweepRow> rows =
        ratio_sweep(head, parse_ratio_list(sweep_ratios));
    std::cout << sweep_table(head, rows);
    if (sweep_out.empty()) {
      std::cout << sweep_csv(rows);
    } else {
      write_text_file(sweep_out, sweep_csv(rows));
      std::cout << "wrote " << sweep_out << "\n";
    }
    return 0;
  }

  if (dump_maps->parsed()) {
    const SyntheticScene scene = scene_for(dump_scene, dump_args);
    const PipelineResult result =
        run_pipeline(scene, options_for("focal", dump_scores));
    const auto paths =
        dump_score_maps(scene.config, result.truths, result.maps, dump_out);
    std::cout << "wrote " << paths.size() << " maps under " << dump_out
              << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const focaldet::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const focaldet::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return 2;
  }
}
