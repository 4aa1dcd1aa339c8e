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

#include "focaldet/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace focaldet {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

}  // namespace

void write_pgm(const std::string& path, int width, int height,
               std::span<const double> values) {
  require(width > 0 && height > 0, "write_pgm: empty image");
  require(values.size() == static_cast<size_t>(width) * height,
          "write_pgm: value count must equal width*height");
  double max_value = 0.0;
  for (double v : values) max_value = std::max(max_value, v);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write PGM file '" + path + "'");
  out << "P5\n" << width << " " << height << "\n255\n";
  for (double v : values) {
    const double scaled = max_value > 0.0 ? 255.0 * v / max_value : 0.0;
    out.put(static_cast<char>(static_cast<unsigned char>(
        std::lround(std::clamp(scaled, 0.0, 255.0)))));
  }
  out.close();

  write_text_file(path + ".txt",
                  "max " + fmt_double(max_value) +
                      "\nencoding: pixel = round(255 * value / max)\n");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file '" + path + "'");
  out << content;
}

std::string token_table_csv(const SceneConfig& cfg,
                            const std::vector<CameraTruth>& truths,
                            const QualityMaps& maps) {
  require(truths.size() == static_cast<size_t>(cfg.cameras),
          "token_table_csv: truth count must match camera count");
  require(maps.q.size() == static_cast<size_t>(cfg.total_tokens()),
          "token_table_csv: map size must match token count");
  std::string csv = "camera,row,col,Q,C,P,sampled,H,y\n";
  const size_t per_cam = static_cast<size_t>(cfg.tokens_per_camera());
  for (int cam = 0; cam < cfg.cameras; ++cam) {
    const TokenTargets& targets = truths[static_cast<size_t>(cam)].targets;
    for (int row = 0; row < cfg.grid_h(); ++row) {
      for (int col = 0; col < cfg.grid_w(); ++col) {
        const size_t local =
            static_cast<size_t>(row) * cfg.grid_w() + static_cast<size_t>(col);
        const size_t flat = per_cam * static_cast<size_t>(cam) + local;
        csv += std::to_string(cam) + "," + std::to_string(row) + "," +
               std::to_string(col) + "," + fmt_double(maps.q[flat]) + "," +
               fmt_double(maps.c[flat]) + "," + fmt_double(maps.p[flat]) +
               "," + std::to_string(static_cast<int>(maps.sampled[flat])) +
               "," + fmt_double(targets.heatmap[local]) + "," +
               fmt_double(targets.quality_y[local]) + "\n";
      }
    }
  }
  return csv;
}

namespace {

std::string layer_file_name(int layer) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "attn_layer_%02d.pgm", layer);
  return buf;
}

}  // namespace

std::vector<std::string> dump_attention_maps(const DecoderTrace& trace,
                                             const std::string& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) {
    throw InputError("cannot create directory '" + directory +
                     "': " + ec.message());
  }
  std::vector<std::string> paths;
  for (size_t l = 0; l < trace.layers.size(); ++l) {
    const DenseMatrix& attn = trace.layers[l].attention;
    const std::string path =
        (std::filesystem::path(directory) / layer_file_name(static_cast<int>(l)))
            .string();
    write_pgm(path, attn.cols(), attn.rows(), attn.data());
    paths.push_back(path);
  }
  return paths;
}

std::vector<std::string> dump_score_maps(const SceneConfig& cfg,
                                         const std::vector<CameraTruth>& truths,
                                         const QualityMaps& maps,
                                         const std::string& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) {
    throw InputError("cannot create directory '" + directory +
                     "': " + ec.message());
  }
  std::vector<std::string> paths;
  const size_t per_cam = static_cast<size_t>(cfg.tokens_per_camera());
  auto dump = [&](const std::string& name, int cam,
                  std::span<const double> values) {
    const std::string path =
        (std::filesystem::path(directory) /
         (name + "_cam" + std::to_string(cam) + ".pgm"))
            .string();
    write_pgm(path, cfg.grid_w(), cfg.grid_h(), values);
    paths.push_back(path);
  };
  for (int cam = 0; cam < cfg.cameras; ++cam) {
    const size_t offset = per_cam * static_cast<size_t>(cam);
    dump("q", cam, std::span<const double>(maps.q.data() + offset, per_cam));
    dump("c", cam, std::span<const double>(maps.c.data() + offset, per_cam));
    dump("p", cam, std::span<const double>(maps.p.data() + offset, per_cam));
    dump("h", cam,
         std::span<const double>(
             truths[static_cast<size_t>(cam)].targets.heatmap.data(),
             per_cam));
  }
  return paths;
}

}  // namespace focaldet
