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

#include "pamvos/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pamvos/imageio.hpp"
#include "pamvos/rng.hpp"

namespace fs = std::filesystem;

namespace pamvos {

namespace {

using Clock = std::chrono::steady_clock;

std::string numbered(const std::string& dir, const char* prefix, size_t i, const char* ext) {
  char name[64];
  std::snprintf(name, sizeof(name), "%s_%04zu.%s", prefix, i, ext);
  return (fs::path(dir) / name).string();
}

std::string shape_name(SpriteSpec::Shape s) {
  switch (s) {
    case SpriteSpec::Shape::kSquare:
      return "square";
    case SpriteSpec::Shape::kTriangle:
      return "triangle";
    case SpriteSpec::Shape::kHexagon:
      return "hexagon";
  }
  return "?";
}

SpriteSpec::Shape shape_from_name(const std::string& name) {
  if (name == "square") return SpriteSpec::Shape::kSquare;
  if (name == "triangle") return SpriteSpec::Shape::kTriangle;
  if (name == "hexagon") return SpriteSpec::Shape::kHexagon;
  throw std::invalid_argument("unknown sprite shape: " + name);
}

nlohmann::json sprite_to_json(const SpriteSpec& s) {
  return {{"shape", shape_name(s.shape)},
          {"half_size", s.half_size},
          {"color", s.color},
          {"center", {s.center_x, s.center_y}},
          {"velocity", {s.velocity_x, s.velocity_y}},
          {"rotate_deg", s.rotate_deg},
          {"scale_rate", s.scale_rate},
          {"shear_rate", s.shear_rate},
          {"motion_start", s.motion_start},
          {"motion_stop", s.motion_stop},
          {"background", s.background},
          {"noise_amplitude", s.noise_amplitude}};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int fail(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 1;
}

}  // namespace

void save_clip(const SynthClip& clip, const std::string& dir) {
  fs::create_directories(dir);
  for (size_t i = 0; i < clip.frames.size(); ++i) {
    write_ppm(clip.frames[i], numbered(dir, "frame", i, "ppm"));
    write_pgm_mask(clip.gt_masks[i], numbered(dir, "mask", i, "pgm"));
  }
  nlohmann::json manifest = {{"seed", clip.seed},
                             {"frames", clip.frames.size()},
                             {"height", clip.height},
                             {"width", clip.width},
                             {"sprite", sprite_to_json(clip.spec)}};
  write_file((fs::path(dir) / "clip.json").string(), manifest.dump(2) + "\n");
}

LoadedClip load_clip(const std::string& dir) {
  LoadedClip clip;
  for (size_t i = 0;; ++i) {
    const std::string path = numbered(dir, "frame", i, "ppm");
    if (!fs::exists(path)) break;
    clip.frames.push_back(read_ppm(path));
  }
  if (clip.frames.empty()) throw IoError("no frame_0000.ppm under " + dir);
  clip.height = clip.frames[0].extent(0);
  clip.width = clip.frames[0].extent(1);
  for (size_t i = 0; i < clip.frames.size(); ++i) {
    const std::string path = numbered(dir, "mask", i, "pgm");
    if (!fs::exists(path)) break;
    clip.masks.push_back(read_pgm_mask(path));
  }
  return clip;
}

int cmd_synth(const SynthArgs& args) {
  try {
    if (args.out_dir.empty()) return fail("synth: --out is required");
    // Validate before touching the filesystem so failures leave no partial output.
    const SynthClip clip =
        generate_clip(args.seed, args.frames, args.height, args.width, args.sprite);
    save_clip(clip, args.out_dir);
    std::cout << "wrote " << clip.frames.size() << " frames to " << args.out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(std::string("synth: ") + e.what());
  }
}

int cmd_run(const RunArgs& args) {
  try {
    const LoadedClip clip = load_clip(args.clip_dir);
    const std::string first_mask_path = numbered(args.clip_dir, "mask", 0, "pgm");
    if (clip.masks.empty())
      return fail("run: missing first frame annotation " + first_mask_path);

    SequenceConfig cfg = args.config;
    EncoderWeights weights;
    if (!args.weights_in.empty()) {
      weights = load_weights(args.weights_in);
      cfg.encoder = weights.mode;
      cfg.seed = weights.seed;
    } else {
      weights = EncoderWeights::make(cfg.encoder, cfg.seed);
    }
    PixelMemory final_memory(weights.key_channels(), weights.value_channels());
    const RunReport report =
        segment_sequence(clip.frames, clip.masks[0], cfg, weights, &final_memory);

    fs::create_directories(args.out_dir);
    for (size_t i = 0; i < report.frames.size(); ++i)
      write_pgm_mask(report.frames[i].mask, numbered(args.out_dir, "pred", i, "pgm"));

    nlohmann::json j;
    std::string csv_row;
    if (clip.has_all_masks()) {
      std::vector<Tensor> preds;
      for (const FrameResult& f : report.frames) preds.push_back(f.mask);
      const MetricReport metrics = evaluate_masks(
          preds, clip.masks, default_boundary_tolerance(clip.height, clip.width), report.fps);
      j = report_to_json(report, metrics);
      csv_row = report_csv_row(report, &metrics);
    } else {
      j = report_to_json(report);
      csv_row = report_csv_row(report);
    }
    write_file((fs::path(args.out_dir) / "report.json").string(), j.dump(2) + "\n");
    write_file((fs::path(args.out_dir) / "report.csv").string(),
               report_csv_header() + "\n" + csv_row + "\n");

    if (!args.weights_out.empty()) save_weights(weights, args.weights_out);
    if (!args.memory_out.empty()) save_memory(final_memory, args.memory_out);
    return 0;
  } catch (const std::exception& e) {
    return fail(std::string("run: ") + e.what());
  }
}

int cmd_bench(const BenchArgs& args) {
  try {
    if (args.sizes.empty()) return fail("bench: --sizes must be non-empty");
    if (args.repetitions < 1) return fail("bench: --reps must be >= 1");
    const LoadedClip clip = load_clip(args.clip_dir);
    const EncoderWeights weights = EncoderWeights::make(args.config.encoder, args.config.seed);

    auto t0 = Clock::now();
    const QueryEncoding q = encode_query(clip.frames[0], weights);
    const double encode_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

    const int ck = weights.key_channels(), cv = weights.value_channels();
    SeededRng rng(args.config.seed);

    std::ostringstream csv;
    csv << "memory_size,match_ms,encode_ms,decode_ms,fps\n";
    for (size_t size : args.sizes) {
      if (size == 0) return fail("bench: memory sizes must be positive");
      PixelMemory memory(ck, cv);
      std::vector<float> key(static_cast<size_t>(ck)), value(static_cast<size_t>(cv));
      for (size_t i = 0; i < size; ++i) {
        for (float& v : key) v = rng.uniform(-1.0f, 1.0f);
        for (float& v : value) v = rng.uniform(-1.0f, 1.0f);
        memory.append(key, value, Provenance{0, 0, static_cast<int>(i)});
      }

      std::vector<double> match_samples;
      Tensor activated;
      for (int rep = 0; rep < args.repetitions; ++rep) {
        t0 = Clock::now();
        activated = memory_match(q.key, q.value, memory);
        match_samples.push_back(
            std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
      }
      const double match_ms = median(match_samples);

      t0 = Clock::now();
      const Tensor logits = decode(activated, q.pyramid, weights);
      (void)logits;
      const double decode_ms =
          std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

      const double fps = 1000.0 / (encode_ms + match_ms + decode_ms);
      csv << size << "," << match_ms << "," << encode_ms << "," << decode_ms << "," << fps
          << "\n";
    }

    fs::create_directories(args.out_dir);
    write_file((fs::path(args.out_dir) / "bench.csv").string(), csv.str());
    return 0;
  } catch (const std::exception& e) {
    return fail(std::string("bench: ") + e.what());
  }
}

int cmd_ablate(const AblateArgs& args) {
  try {
    const LoadedClip loaded = load_clip(args.clip_dir);
    if (!loaded.has_all_masks())
      return fail("ablate: clip must provide ground-truth masks for every frame");

    std::vector<AblationConfig> grid = args.grid;
    if (grid.empty()) {
      // Default 2x2 layout: temporal strategy x spatial update ratio.
      for (TriggerMode mode : {TriggerMode::kVariationAware, TriggerMode::kPeriodic})
        for (float beta : {1.0f, kDefaultUpdateRatio})
          grid.push_back({mode, 5, beta});
    }

    std::vector<AblationConfig> unique;
    std::set<std::string> seen;
    for (const AblationConfig& g : grid) {
      if (!seen.insert(ablation_label(g)).second) {
        std::cerr << "warning: duplicate config dropped: " << ablation_label(g) << "\n";
        continue;
      }
      unique.push_back(g);
    }

    SynthClip clip;
    clip.frames = loaded.frames;
    clip.gt_masks = loaded.masks;
    clip.height = loaded.height;
    clip.width = loaded.width;

    const std::vector<AblationRow> rows = ablate(clip, unique, args.config);

    std::ostringstream csv;
    csv << "config,mean_J,mean_F,JF,fps,final_memory,triggers\n";
    for (const AblationRow& r : rows) {
      if (!r.error.empty()) {
        std::cerr << "warning: " << r.label << " failed: " << r.error << "\n";
        csv << "\"" << r.label << "\",nan,nan,nan,nan,0,0\n";
        continue;
      }
      csv << "\"" << r.label << "\"," << r.mean_j << "," << r.mean_f << "," << r.jf << ","
          << r.fps << "," << r.final_memory << "," << r.triggers << "\n";
    }

    fs::create_directories(args.out_dir);
    write_file((fs::path(args.out_dir) / "ablate.csv").string(), csv.str());
    return 0;
  } catch (const std::exception& e) {
    return fail(std::string("ablate: ") + e.what());
  }
}

namespace {

TriggerMode parse_trigger(const std::string& text, int& period) {
  if (text == "var") return TriggerMode::kVariationAware;
  if (text == "every") return TriggerMode::kEveryFrame;
  if (text == "never") return TriggerMode::kNever;
  if (text.rfind("periodic=", 0) == 0) {
    period = std::stoi(text.substr(9));
    if (period < 1) throw CLI::ValidationError("--trigger", "period must be >= 1");
    return TriggerMode::kPeriodic;
  }
  throw CLI::ValidationError("--trigger", "expected var|every|periodic=N|never");
}

void add_config_flags(CLI::App* cmd, SequenceConfig& cfg, std::string& trigger_text,
                      std::string& mode_text, std::string& decode_text) {
  cmd->add_option("--seed", cfg.seed, "Deterministic seed");
  cmd->add_option("--beta", cfg.beta, "Update ratio in (0, 1]")->check(CLI::Range(1e-6, 1.0));
  cmd->add_option("--trigger", trigger_text, "var|every|periodic=N|never");
  cmd->add_option("--thf", cfg.th_f, "Image difference threshold th_f");
  cmd->add_option("--thm", cfg.th_m, "Mask difference threshold th_m");
  cmd->add_option("--pth", cfg.p_th, "Variation count threshold P_th");
  cmd->add_option("--mode", mode_text, "seeded|handcrafted");
  cmd->add_option("--decode", decode_text, "refine|propagate");
  cmd->add_option("--memory-cap", cfg.memory_cap, "Reject appends beyond this entry count");
}

void apply_config_flags(SequenceConfig& cfg, const std::string& trigger_text,
                        const std::string& mode_text, const std::string& decode_text) {
  if (!trigger_text.empty()) cfg.trigger = parse_trigger(trigger_text, cfg.period);
  if (!mode_text.empty()) {
    if (mode_text == "seeded")
      cfg.encoder = EncoderMode::kSeededConv;
    else if (mode_text == "handcrafted")
      cfg.encoder = EncoderMode::kHandcrafted;
    else
      throw CLI::ValidationError("--mode", "expected seeded|handcrafted");
  }
  if (!decode_text.empty()) {
    if (decode_text == "refine")
      cfg.decode = DecodeMode::kRefinement;
    else if (decode_text == "propagate")
      cfg.decode = DecodeMode::kLabelPropagation;
    else
      throw CLI::ValidationError("--decode", "expected refine|propagate");
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Pixel-adaptive memory video object segmentation toolkit"};
  app.require_subcommand(1);

  // synth
  SynthArgs synth;
  std::string synth_shape = "square";
  std::vector<int> synth_color, synth_bg;
  std::vector<float> synth_center, synth_velocity;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic clip");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Clip seed");
  synth_cmd->add_option("--frames", synth.frames, "Clip length");
  synth_cmd->add_option("--height", synth.height, "Frame height (divisible by 16)");
  synth_cmd->add_option("--width", synth.width, "Frame width (divisible by 16)");
  synth_cmd->add_option("--shape", synth_shape, "square|triangle|hexagon");
  synth_cmd->add_option("--size", synth.sprite.half_size, "Sprite half size in px");
  synth_cmd->add_option("--color", synth_color, "Sprite RGB, e.g. --color 220 60 50")
      ->expected(3);
  synth_cmd->add_option("--center", synth_center, "Start center x y")->expected(2);
  synth_cmd->add_option("--velocity", synth_velocity, "Translation px/frame dx dy")
      ->expected(2);
  synth_cmd->add_option("--rotate", synth.sprite.rotate_deg, "Rotation deg/frame");
  synth_cmd->add_option("--scale-rate", synth.sprite.scale_rate, "Scale factor/frame");
  synth_cmd->add_option("--shear-rate", synth.sprite.shear_rate, "Shear increment/frame");
  synth_cmd->add_option("--motion-start", synth.sprite.motion_start, "First moving frame");
  synth_cmd->add_option("--motion-stop", synth.sprite.motion_stop, "Last moving frame");
  synth_cmd->add_option("--bg", synth_bg, "Background RGB")->expected(3);
  synth_cmd->add_option("--bg-noise", synth.sprite.noise_amplitude,
                        "Background noise amplitude");

  // run
  RunArgs run;
  std::string run_trigger, run_mode, run_decode;
  CLI::App* run_cmd = app.add_subcommand("run", "Segment a clip given its first mask");
  run_cmd->add_option("--clip", run.clip_dir, "Clip directory")->required();
  run_cmd->add_option("--out", run.out_dir, "Output directory")->required();
  add_config_flags(run_cmd, run.config, run_trigger, run_mode, run_decode);
  run_cmd->add_option("--weights", run.weights_in, "Load a weight snapshot");
  run_cmd->add_option("--save-weights", run.weights_out, "Write the weight snapshot");
  run_cmd->add_option("--dump-memory", run.memory_out, "Write the final memory snapshot");

  // bench
  BenchArgs bench;
  std::string bench_trigger, bench_mode, bench_decode;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Match-time scaling benchmark");
  bench_cmd->add_option("--clip", bench.clip_dir, "Clip directory")->required();
  bench_cmd->add_option("--out", bench.out_dir, "Output directory")->required();
  bench_cmd->add_option("--sizes", bench.sizes, "Injected memory entry counts")
      ->required()
      ->delimiter(',');
  bench_cmd->add_option("--reps", bench.repetitions, "Repetitions per size (median)");
  add_config_flags(bench_cmd, bench.config, bench_trigger, bench_mode, bench_decode);

  // ablate; accuracy rows are meaningful in handcrafted mode, so that is the
  // default here (override with --mode/--decode).
  AblateArgs ablate_args;
  std::string ablate_mode = "handcrafted", ablate_decode = "propagate";
  std::vector<float> ablate_betas;
  std::vector<std::string> ablate_triggers;
  std::string unused_trigger;
  CLI::App* ablate_cmd = app.add_subcommand("ablate", "Trigger x beta ablation sweep");
  ablate_cmd->add_option("--clip", ablate_args.clip_dir, "Clip directory")->required();
  ablate_cmd->add_option("--out", ablate_args.out_dir, "Output directory")->required();
  ablate_cmd->add_option("--betas", ablate_betas, "Update ratios to sweep")->delimiter(',');
  ablate_cmd->add_option("--triggers", ablate_triggers, "Trigger modes to sweep")
      ->delimiter(',');
  add_config_flags(ablate_cmd, ablate_args.config, unused_trigger, ablate_mode, ablate_decode);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth_cmd->parsed()) {
      synth.sprite.shape = shape_from_name(synth_shape);
      if (!synth_color.empty())
        synth.sprite.color = {synth_color[0], synth_color[1], synth_color[2]};
      if (!synth_bg.empty()) synth.sprite.background = {synth_bg[0], synth_bg[1], synth_bg[2]};
      if (!synth_center.empty()) {
        synth.sprite.center_x = synth_center[0];
        synth.sprite.center_y = synth_center[1];
      }
      if (!synth_velocity.empty()) {
        synth.sprite.velocity_x = synth_velocity[0];
        synth.sprite.velocity_y = synth_velocity[1];
      }
      return cmd_synth(synth);
    }
    if (run_cmd->parsed()) {
      apply_config_flags(run.config, run_trigger, run_mode, run_decode);
      return cmd_run(run);
    }
    if (bench_cmd->parsed()) {
      apply_config_flags(bench.config, bench_trigger, bench_mode, bench_decode);
      return cmd_bench(bench);
    }
    if (ablate_cmd->parsed()) {
      apply_config_flags(ablate_args.config, unused_trigger, ablate_mode, ablate_decode);
      for (const std::string& t : ablate_triggers) {
        AblationConfig g;
        g.trigger = parse_trigger(t, g.period);
        for (float b : ablate_betas.empty() ? std::vector<float>{ablate_args.config.beta}
                                            : ablate_betas) {
          g.beta = b;
          ablate_args.grid.push_back(g);
        }
      }
      if (ablate_triggers.empty() && !ablate_betas.empty())
        for (float b : ablate_betas)
          ablate_args.grid.push_back({ablate_args.config.trigger, ablate_args.config.period, b});
      return cmd_ablate(ablate_args);
    }
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return fail("no subcommand selected");
}

}  // namespace pamvos
