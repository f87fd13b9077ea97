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

#include "pamvos/pipeline.hpp"

#include <chrono>
#include <sstream>
#include <utility>

namespace pamvos {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool should_trigger(const SequenceConfig& cfg, int frame_index, TriggerState& state,
                    const Tensor& frame, const Tensor& prev_frame, const Tensor& mask,
                    const Tensor& prev_mask) {
  switch (cfg.trigger) {
    case TriggerMode::kEveryFrame:
      return true;
    case TriggerMode::kNever:
      return false;
    case TriggerMode::kPeriodic:
      return frame_index % cfg.period == 0;
    case TriggerMode::kVariationAware: {
      const Tensor df = frame_difference(frame, prev_frame);
      const Tensor dm = mask_difference(mask, prev_mask);
      TriggerDecision d = trigger_step(state, df, dm);
      state = d.state;
      return d.triggered;
    }
  }
  return false;
}

}  // namespace

void validate_config(const SequenceConfig& cfg) {
  if (!(cfg.beta > 0.0f && cfg.beta <= 1.0f))
    throw std::invalid_argument("beta must be in (0, 1]");
  if (cfg.trigger == TriggerMode::kPeriodic && cfg.period < 1)
    throw std::invalid_argument("periodic trigger needs period >= 1");
  if (cfg.decode == DecodeMode::kLabelPropagation && cfg.encoder != EncoderMode::kHandcrafted)
    throw ModeError("label-propagation decode requires the handcrafted encoder");
}

RunReport segment_sequence(const std::vector<Tensor>& frames, const Tensor& first_mask,
                           const SequenceConfig& cfg) {
  const EncoderWeights weights = EncoderWeights::make(cfg.encoder, cfg.seed);
  return segment_sequence(frames, first_mask, cfg, weights);
}

RunReport segment_sequence(const std::vector<Tensor>& frames, const Tensor& first_mask,
                           const SequenceConfig& cfg, const EncoderWeights& weights,
                           PixelMemory* final_memory) {
  validate_config(cfg);
  if (frames.empty()) throw std::invalid_argument("segment_sequence needs >= 1 frame");
  if (weights.mode != cfg.encoder)
    throw ModeError("weights were built for a different encoder mode");
  const int h = frames[0].extent(0), w = frames[0].extent(1);
  if (cfg.height != 0 && (cfg.height != h || cfg.width != w))
    throw DimensionError("frames do not match the configured input extents");
  if (h % 16 != 0 || w % 16 != 0)
    throw DimensionError("frame extents must be divisible by 16");
  for (const Tensor& f : frames)
    if (f.rank() != 3 || f.extent(0) != h || f.extent(1) != w || f.extent(2) != 3)
      throw DimensionError("all frames must share H x W x 3 extents");
  if (first_mask.rank() != 3 || first_mask.extent(0) != h || first_mask.extent(1) != w ||
      first_mask.extent(2) != 1)
    throw DimensionError("first mask extents do not match the frames");

  TriggerState trigger_state{0, cfg.th_f, cfg.th_m, cfg.p_th};

  RunReport report;
  report.config = cfg;
  const auto run_start = Clock::now();

  // Frame 0: annotation passthrough; the memory starts from a reference
  // encoding of the full first frame regardless of beta.
  auto t0 = Clock::now();
  QueryEncoding q = encode_query(frames[0], weights);
  q.pyramid.frame_index = 0;
  FrameResult first;
  first.timings.encode_ms = ms_since(t0);

  t0 = Clock::now();
  const ReferenceEncoding ref0 = encode_reference(q.pyramid, first_mask, weights);
  PixelMemory memory = memory_init(ref0.key, ref0.value, cfg.memory_cap);
  first.timings.update_ms = ms_since(t0);

  first.mask = first_mask;
  first.memory_size_after = memory.size();
  report.frames.push_back(std::move(first));

  for (size_t t = 1; t < frames.size(); ++t) {
    FrameResult result;

    auto ts = Clock::now();
    q = encode_query(frames[t], weights);
    q.pyramid.frame_index = static_cast<int>(t);
    result.timings.encode_ms = ms_since(ts);

    Tensor scores;  // logits (refinement) or probabilities (propagation)
    if (cfg.decode == DecodeMode::kRefinement) {
      ts = Clock::now();
      const Tensor activated = memory_match(q.key, q.value, memory);
      result.timings.match_ms = ms_since(ts);
      ts = Clock::now();
      scores = decode(activated, q.pyramid, weights);
      result.timings.decode_ms = ms_since(ts);
    } else {
      ts = Clock::now();
      Tensor cell_probs = propagate_cell_probs(q.key, memory);
      result.timings.match_ms = ms_since(ts);
      ts = Clock::now();
      for (int step = 0; step < 4; ++step) cell_probs = upsample_bilinear_x2(cell_probs);
      scores = std::move(cell_probs);
      result.timings.decode_ms = ms_since(ts);
    }
    result.mask = binarize(scores, cfg.decode == DecodeMode::kRefinement ? 0.0f : 0.5f);

    ts = Clock::now();
    const Tensor& prev_mask = report.frames.back().mask;
    const bool fired = should_trigger(cfg, static_cast<int>(t), trigger_state, frames[t],
                                      frames[t - 1], result.mask, prev_mask);
    if (fired) {
      const ReferenceEncoding ref = encode_reference(q.pyramid, result.mask, weights);
      const std::vector<int> picks = select_update_pixels(ref.key, memory, cfg.beta);
      // a configured hard cap rejects appends that would exceed it; the run
      // continues on the frozen memory
      if (cfg.memory_cap == 0 || memory.size() + picks.size() <= cfg.memory_cap)
        memory_append(memory, picks, ref.key, ref.value, static_cast<int>(t));
      ++report.trigger_count;
    }
    result.timings.update_ms = ms_since(ts);

    result.triggered = fired;
    result.memory_size_after = memory.size();
    report.frames.push_back(std::move(result));
  }

  report.total_seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
  report.fps = static_cast<double>(report.frames.size()) / report.total_seconds;
  report.final_memory_size = memory.size();
  if (final_memory != nullptr) *final_memory = std::move(memory);
  return report;
}

std::string trigger_mode_name(TriggerMode mode, int period) {
  switch (mode) {
    case TriggerMode::kVariationAware:
      return "var";
    case TriggerMode::kEveryFrame:
      return "every";
    case TriggerMode::kPeriodic:
      return "periodic=" + std::to_string(period);
    case TriggerMode::kNever:
      return "never";
  }
  return "?";
}

std::string ablation_label(const AblationConfig& cfg) {
  std::ostringstream os;
  os << "trigger=" << trigger_mode_name(cfg.trigger, cfg.period) << " beta=" << cfg.beta;
  return os.str();
}

std::vector<AblationRow> ablate(const SynthClip& clip, const std::vector<AblationConfig>& grid,
                                const SequenceConfig& base) {
  if (grid.empty()) throw std::invalid_argument("ablation grid must be non-empty");
  if (clip.frames.empty()) throw std::invalid_argument("ablation clip is empty");

  std::vector<AblationRow> rows;
  const int tol = default_boundary_tolerance(clip.height, clip.width);
  for (const AblationConfig& g : grid) {
    AblationRow row;
    row.label = ablation_label(g);
    try {
      SequenceConfig cfg = base;
      cfg.trigger = g.trigger;
      cfg.period = g.period;
      cfg.beta = g.beta;
      const RunReport report = segment_sequence(clip.frames, clip.gt_masks[0], cfg);

      std::vector<Tensor> preds;
      preds.reserve(report.frames.size());
      for (const FrameResult& f : report.frames) preds.push_back(f.mask);
      const MetricReport m = evaluate_masks(preds, clip.gt_masks, tol, report.fps);
      row.mean_j = m.mean_j;
      row.mean_f = m.mean_f;
      row.jf = m.jf;
      row.fps = report.fps;
      row.final_memory = report.final_memory_size;
      row.triggers = report.trigger_count;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

nlohmann::json config_to_json(const SequenceConfig& cfg) {
  return {{"beta", cfg.beta},
          {"th_f", cfg.th_f},
          {"th_m", cfg.th_m},
          {"p_th", cfg.p_th},
          {"trigger", trigger_mode_name(cfg.trigger, cfg.period)},
          {"encoder", cfg.encoder == EncoderMode::kSeededConv ? "seeded" : "handcrafted"},
          {"decode", cfg.decode == DecodeMode::kRefinement ? "refine" : "propagate"},
          {"seed", cfg.seed},
          {"memory_cap", cfg.memory_cap}};
}

}  // namespace

nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json frames = nlohmann::json::array();
  for (size_t i = 0; i < report.frames.size(); ++i) {
    const FrameResult& f = report.frames[i];
    frames.push_back({{"index", i},
                      {"triggered", f.triggered},
                      {"memory_size_after", f.memory_size_after},
                      {"timings_ms",
                       {{"encode", f.timings.encode_ms},
                        {"match", f.timings.match_ms},
                        {"decode", f.timings.decode_ms},
                        {"update", f.timings.update_ms}}}});
  }
  return {{"config", config_to_json(report.config)},
          {"frames", frames},
          {"aggregate",
           {{"fps", report.fps},
            {"total_seconds", report.total_seconds},
            {"trigger_count", report.trigger_count},
            {"final_memory_size", report.final_memory_size}}}};
}

nlohmann::json report_to_json(const RunReport& report, const MetricReport& metrics) {
  nlohmann::json j = report_to_json(report);
  for (size_t i = 0; i < metrics.per_frame_j.size() && i < j["frames"].size(); ++i) {
    j["frames"][i]["jaccard"] = metrics.per_frame_j[i];
    j["frames"][i]["boundary_f"] = metrics.per_frame_f[i];
  }
  j["aggregate"]["mean_j"] = metrics.mean_j;
  j["aggregate"]["mean_f"] = metrics.mean_f;
  j["aggregate"]["jf"] = metrics.jf;
  return j;
}

std::string report_csv_header() {
  return "frames,fps,total_seconds,trigger_count,final_memory_size,mean_J,mean_F,JF";
}

std::string report_csv_row(const RunReport& report, const MetricReport* metrics) {
  std::ostringstream os;
  os << report.frames.size() << "," << report.fps << "," << report.total_seconds << ","
     << report.trigger_count << "," << report.final_memory_size << ",";
  if (metrics != nullptr)
    os << metrics->mean_j << "," << metrics->mean_f << "," << metrics->jf;
  else
    os << "nan,nan,nan";
  return os.str();
}

}  // namespace pamvos
