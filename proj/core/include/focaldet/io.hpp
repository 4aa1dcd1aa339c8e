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

#ifndef FOCALDET_IO_HPP_
#define FOCALDET_IO_HPP_

#include <span>
#include <string>
#include <vector>

#include "focaldet/pipeline.hpp"

namespace focaldet {

/// Binary 8-bit PGM (P5), max-normalized: pixel = round(255 * value / max).
/// The scale is noted in a sidecar text file at `path + ".txt"`.
void write_pgm(const std::string& path, int width, int height,
               std::span<const double> values);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Global token table, one row per token:
/// camera,row,col,Q,C,P,sampled,H,y
std::string token_table_csv(const SceneConfig& cfg,
                            const std::vector<CameraTruth>& truths,
                            const QualityMaps& maps);

/// One PGM per decoder layer (attn_layer_00.pgm, ...) under `directory`.
/// Returns the written paths.
std::vector<std::string> dump_attention_maps(const DecoderTrace& trace,
                                             const std::string& directory);

/// Q/C/P/H score and target images per camera under `directory`.
std::vector<std::string> dump_score_maps(const SceneConfig& cfg,
                                         const std::vector<CameraTruth>& truths,
                                         const QualityMaps& maps,
                                         const std::string& directory);

}  // namespace focaldet

#endif  // FOCALDET_IO_HPP_
