// Copyright (c) 2026 The pamvos Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pamvos/decoder.hpp"
#include "pamvos/encoder.hpp"
#include "pamvos/evalkit.hpp"
#include "pamvos/pam.hpp"
#include "pamvos/tensor.hpp"

namespace pamvos {

enum class TriggerMode { kVariationAware, kEveryFrame, kPeriodic, kNever };
enum class DecodeMode { kRefinement, kLabelPropagation };

struct SequenceConfig {
  float beta = kDefaultUpdateRatio;
  float th_f = kDefaultFrameThreshold;
  float th_m = kDefaultMaskThreshold;
  int p_th = kDefaultVariationThreshold;
  TriggerMode trigger = TriggerMode::kVariationAware;
  int period = 5;  // for TriggerMode::kPeriodic
  EncoderMode encoder = EncoderMode::kSeededConv;
  DecodeMode decode = DecodeMode::kRefinement;
  uint32_t seed = 7;
  int height = 0;  // 0 -> inferred from the first frame
  int width = 0;
  std::size_t memory_cap = 0;  // 0 -> unbounded
};

struct StageTimings {
  double encode_ms = 0;
  double match_ms = 0;
  double decode_ms = 0;
  double update_ms = 0;
};

struct FrameResult {
  Tensor mask;
  bool triggered = false;
  std::size_t memory_size_after = 0;
  StageTimings timings;
};

struct RunReport {
  std::vector<FrameResult> frames;
  double total_seconds = 0;
  double fps = 0;
  int trigger_count = 0;
  std::size_t final_memory_size = 0;
  SequenceConfig config;
};

void validate_config(const SequenceConfig& cfg);

/// Frame-by-frame inference given the first-frame annotation. Frame 0 passes
/// the annotation through and seeds the memory via reference encoding; every
/// later frame runs match + decode, evaluates the trigger on the predicted
/// masks, and on trigger appends the floor(beta * HW) least-similar pixels
/// from a reference encoding that reuses the buffered pyramid.
RunReport segment_sequence(const std::vector<Tensor>& frames, const Tensor& first_mask,
                           const SequenceConfig& cfg);

/// Same, with explicit weights (e.g. from a snapshot); optionally hands back
/// the final memory state for dumping.
RunReport segment_sequence(const std::vector<Tensor>& frames, const Tensor& first_mask,
                           const SequenceConfig& cfg, const EncoderWeights& weights,
                           PixelMemory* final_memory = nullptr);

struct AblationConfig {
  TriggerMode trigger = TriggerMode::kVariationAware;
  int period = 5;
  float beta = kDefaultUpdateRatio;
};

struct AblationRow {
  std::string label;
  double mean_j = 0;
  double mean_f = 0;
  double jf = 0;
  double fps = 0;
  std::size_t final_memory = 0;
  int triggers = 0;
  std::string error;  // empty on success
};

std::string ablation_label(const AblationConfig& cfg);

/// Runs every grid entry on the same clip; per-run failures land in the row's
/// error field and the sweep continues.
std::vector<AblationRow> ablate(const SynthClip& clip, const std::vector<AblationConfig>& grid,
                                const SequenceConfig& base);

std::string trigger_mode_name(TriggerMode mode, int period);

/// Report serialization; timing fields (timings, fps, total_seconds) are the
/// only nondeterministic parts.
nlohmann::json report_to_json(const RunReport& report);
nlohmann::json report_to_json(const RunReport& report, const MetricReport& metrics);

/// Aggregate CSV: fixed header plus one row per run.
std::string report_csv_header();
std::string report_csv_row(const RunReport& report, const MetricReport* metrics = nullptr);

}  // namespace pamvos
