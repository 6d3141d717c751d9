/* Copyright 2026 The SoVTP Toolkit Authors.

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

#include "sovtp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "sovtp/errors.hpp"
#include "sovtp/pipeline.hpp"

#ifndef SOVTP_VERSION
#define SOVTP_VERSION "0.0.0"
#endif

namespace sovtp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliConfig {
  PipelineConfig pipeline;
  BackendConfig backend;
  std::string stub_path;
  std::string catalog_path;
  std::string templates_path;
  std::string overlap_check = "all";
  std::string mode = "sovtp";
  std::string f1 = "macro";
  int stage_attempts = 1;
  bool no_boxes = false;
  bool no_numbers = false;
  bool no_landmarks = false;
  bool no_au_tags = false;
  bool masks = false;

  std::unique_ptr<AuCatalog> catalog;
  std::unique_ptr<TemplateSet> templates;
};

void add_analysis_options(CLI::App* cmd, CliConfig& c) {
  auto& p = c.pipeline;
  cmd->add_option("--epsilon", p.epsilon, "Face overlap threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd->add_option("--overlap-check", c.overlap_check, "Overlap comparison: all | adjacent")
      ->check(CLI::IsMember({"all", "adjacent"}))
      ->capture_default_str();
  cmd->add_option("--iou-threshold", p.iou_threshold, "Tracking IoU threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--tau", p.tau, "AU activation threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd->add_option("-k,--top-k", p.top_k, "AUs kept per face")->check(CLI::Range(1, 64))->capture_default_str();
  cmd->add_option("--frames", p.frame_sample_count, "Frames sampled per video (0 = all)")
      ->check(CLI::Range(0, 100000))
      ->capture_default_str();
  cmd->add_option("--frame-width", p.frame_width, "Normalized frame width (0 = keep)")
      ->check(CLI::Range(0, 16384))
      ->capture_default_str();
  cmd->add_option("--frame-height", p.frame_height, "Normalized frame height (0 = keep)")
      ->check(CLI::Range(0, 16384))
      ->capture_default_str();
  cmd->add_option("--catalog", c.catalog_path, "AU catalog JSON (default: built in)");
  cmd->add_flag("--no-boxes", c.no_boxes, "Do not draw face boxes");
  cmd->add_flag("--no-numbers", c.no_numbers, "Do not draw face numbers");
  cmd->add_flag("--no-landmarks", c.no_landmarks, "Do not draw landmarks");
  cmd->add_flag("--no-au-tags", c.no_au_tags, "Do not draw AU tags");
  cmd->add_flag("--masks", c.masks, "Draw body masks");
  cmd->add_option("--box-thickness", p.render.style.box_thickness)->check(CLI::Range(1, 64))->capture_default_str();
  cmd->add_option("--font-scale", p.render.style.font_scale)->check(CLI::Range(1, 16))->capture_default_str();
}

void add_chain_options(CLI::App* cmd, CliConfig& c) {
  auto& p = c.pipeline;
  cmd->add_option("--mode", c.mode, "Prompt mode: plain | muscle | muscle+context | muscle+context+body | sovtp")
      ->check(CLI::IsMember({"plain", "muscle", "muscle+context", "muscle+context+body", "sovtp"}))
      ->capture_default_str();
  cmd->add_option("--max-tokens", p.chain.max_tokens)->check(CLI::Range(1, 1 << 20))->capture_default_str();
  cmd->add_option("--temperature", p.chain.temperature)->check(CLI::Range(0.0, 2.0))->capture_default_str();
  cmd->add_option("--trajectories", p.chain.num_trajectories, "Voted chain runs per video")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  cmd->add_option("--stage-attempts", c.stage_attempts, "Attempts per stage before the chain aborts")
      ->check(CLI::Range(1, 100))
      ->capture_default_str();
  cmd->add_option("--min-patches", p.pixel_budget.min_patches)->check(CLI::Range(0, 1 << 20))->capture_default_str();
  cmd->add_option("--max-patches", p.pixel_budget.max_patches, "0 disables the pixel budget")
      ->check(CLI::Range(0, 1 << 20))
      ->capture_default_str();
  cmd->add_flag("--contact-sheet", p.contact_sheet, "Send frames as one grid image");
  cmd->add_option("--templates", c.templates_path, "Prompt templates JSON (default: built in)");
  cmd->add_option("--endpoint", c.backend.endpoint, "Chat-completions URL");
  cmd->add_option("--model", c.backend.model, "Model name sent to the endpoint");
  cmd->add_option("--token-env", c.backend.token_env, "Environment variable holding the API token")
      ->capture_default_str();
  cmd->add_option("--timeout", c.backend.timeout_seconds)->check(CLI::Range(0.001, 86400.0))->capture_default_str();
  cmd->add_option("--retries", c.backend.retry.max_attempts, "HTTP attempts per request")
      ->check(CLI::Range(1, 100))
      ->capture_default_str();
  cmd->add_option("--backoff-base", c.backend.retry.backoff_base_seconds)
      ->check(CLI::Range(0.0, 3600.0))
      ->capture_default_str();
  cmd->add_option("--backoff-max", c.backend.retry.backoff_max_seconds)
      ->check(CLI::Range(0.0, 3600.0))
      ->capture_default_str();
  cmd->add_option("--stub", c.stub_path, "Scripted offline backend (JSON)");
}

void finalize(CliConfig& c) {
  auto& p = c.pipeline;
  p.overlap_check = c.overlap_check == "adjacent" ? OverlapCheck::kAdjacentPair : OverlapCheck::kAllAccepted;
  p.mode = *parse_prompt_mode(c.mode);
  p.render.layers = {!c.no_boxes, !c.no_numbers, !c.no_landmarks, !c.no_au_tags, c.masks};
  p.chain.model = c.backend.model;
  p.chain.retry.max_attempts = c.stage_attempts;
  if (c.backend.retry.backoff_max_seconds < c.backend.retry.backoff_base_seconds) {
    throw UsageError("--backoff-max must not be below --backoff-base");
  }
  if ((p.frame_width == 0) != (p.frame_height == 0)) {
    throw UsageError("--frame-width and --frame-height must both be 0 or both be positive");
  }
  if (p.pixel_budget.max_patches > 0 && p.pixel_budget.min_patches > p.pixel_budget.max_patches) {
    throw UsageError("--min-patches exceeds --max-patches");
  }
  if (!c.catalog_path.empty()) {
    c.catalog = std::make_unique<AuCatalog>(AuCatalog::load(c.catalog_path));
    p.catalog = c.catalog.get();
  }
  if (!c.templates_path.empty()) {
    c.templates = std::make_unique<TemplateSet>(TemplateSet::load(c.templates_path));
    p.templates = c.templates.get();
  }
}

std::string source_name(const std::string& path) { return path.empty() ? "builtin" : path; }

void print_header(std::ostream& err, const std::string& command, const CliConfig& c) {
  const auto& p = c.pipeline;
  const auto& l = p.render.layers;
  auto b = [](bool v) { return v ? "on" : "off"; };
  std::ostringstream h;
  h << "# sovtp " << SOVTP_VERSION << " " << command << "\n"
    << "# epsilon = " << p.epsilon << "\n"
    << "# overlap_check = " << c.overlap_check << "\n"
    << "# iou_threshold = " << p.iou_threshold << "\n"
    << "# tau = " << p.tau << "\n"
    << "# k = " << p.top_k << "\n"
    << "# frame_sample_count = " << p.frame_sample_count << "\n"
    << "# frame_size = " << p.frame_width << "x" << p.frame_height << "\n"
    << "# pixel_budget = " << p.pixel_budget.min_patches << ".." << p.pixel_budget.max_patches << " patches of "
    << p.pixel_budget.patch_size << "px\n"
    << "# contact_sheet = " << b(p.contact_sheet) << "\n"
    << "# layers = boxes:" << b(l.boxes) << " numbers:" << b(l.numbers) << " landmarks:" << b(l.landmarks)
    << " au_tags:" << b(l.au_tags) << " masks:" << b(l.masks) << "\n"
    << "# box_thickness = " << p.render.style.box_thickness << "\n"
    << "# font_scale = " << p.render.style.font_scale << "\n"
    << "# mode = " << to_string(p.mode) << "\n"
    << "# max_tokens = " << p.chain.max_tokens << "\n"
    << "# temperature = " << p.chain.temperature << "\n"
    << "# trajectories = " << p.chain.num_trajectories << "\n"
    << "# stage_attempts = " << c.stage_attempts << "\n"
    << "# parallelism = " << p.parallelism << "\n"
    << "# backend = " << (c.stub_path.empty() ? "endpoint:" + c.backend.endpoint : "stub:" + c.stub_path) << "\n"
    << "# model = " << c.backend.model << "\n"
    << "# token_env = " << c.backend.token_env << "\n"
    << "# timeout = " << c.backend.timeout_seconds << "\n"
    << "# retries = " << c.backend.retry.max_attempts << " (backoff " << c.backend.retry.backoff_base_seconds
    << ".." << c.backend.retry.backoff_max_seconds << "s)\n"
    << "# catalog = " << source_name(c.catalog_path) << "\n"
    << "# templates = " << source_name(c.templates_path) << "\n"
    << "# f1 = " << c.f1 << "\n";
  err << h.str();
}

std::unique_ptr<Backend> make_backend(const CliConfig& c) {
  if (!c.stub_path.empty()) return StubBackend::load(c.stub_path);
  if (c.backend.endpoint.empty()) throw UsageError("a backend is required: pass --endpoint or --stub");
  c.backend.validate();
  return std::make_unique<ChatCompletionsBackend>(c.backend);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw DataError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string transcript_text(const TranscriptLog& log) {
  std::string out;
  for (const auto& e : log) out += to_jsonl(e) + "\n";
  return out;
}

json ranked_json(const RankedAUs& ranked) {
  json a = json::array();
  for (const auto& r : ranked) a.push_back({{"au_id", r.au_id}, {"score", r.score}});
  return a;
}

json annotations_json(const AnnotatedVideo& video, const CliConfig& c) {
  const auto& p = c.pipeline;
  json frames = json::array();
  for (const auto& f : video.frames) {
    json faces = json::array();
    for (const auto& o : f.plan.overlays) {
      json tags = json::array();
      for (const auto& t : o.au_tags) tags.push_back(t.au_id);
      faces.push_back({{"face_id", o.face_id},
                       {"box", {o.box.x_min(), o.box.y_min(), o.box.x_max(), o.box.y_max()}},
                       {"au_tags", tags}});
    }
    frames.push_back({{"frame_index", f.frame_index},
                      {"image", default_frame_name(f.frame_index)},
                      {"detected", f.detected},
                      {"kept", f.kept},
                      {"faces", faces}});
  }
  json tracks = json::array();
  for (const auto& t : video.tracks) {
    json seen = json::array();
    for (const auto& [idx, obs] : t.observations) seen.push_back(idx);
    tracks.push_back({{"face_id", t.face_id},
                      {"frames", seen},
                      {"ranked_aus", ranked_json(target_ranked_aus(t, *p.catalog, p.tau, p.top_k))}});
  }
  return {{"format", "sovtp-annotations"},
          {"version", 1},
          {"video_id", video.video_id},
          {"frame_width", video.frames.empty() ? 0 : video.frames.front().image.width()},
          {"frame_height", video.frames.empty() ? 0 : video.frames.front().image.height()},
          {"frames", frames},
          {"tracks", tracks}};
}

int cmd_validate(const std::string& path, std::ostream& out) {
  const auto violations = validate_sidecar(read_text(path));
  json a = json::array();
  for (const auto& v : violations) a.push_back({{"location", v.location}, {"field", v.field}, {"message", v.message}});
  out << a.dump() << "\n";
  return violations.empty() ? kExitOk : kExitData;
}

int cmd_annotate(const CliConfig& c, const std::string& sidecar_path, const std::string& frames_dir,
                 const std::string& out_dir, std::ostream& out) {
  const SidecarDocument sidecar = load_sidecar(sidecar_path);
  const AnnotatedVideo video = annotate_video(sidecar, frames_dir, c.pipeline);
  fs::create_directories(out_dir);
  for (const auto& f : video.frames) {
    write_png((fs::path(out_dir) / default_frame_name(f.frame_index)).string(), f.image);
    out << "frame " << f.frame_index << ": detected " << f.detected << ", kept " << f.kept << "\n";
  }
  write_text(fs::path(out_dir) / "annotations.json", annotations_json(video, c).dump(2) + "\n");
  out << "tracks: " << video.tracks.size() << "\n";
  return kExitOk;
}

int cmd_chain(const CliConfig& c, const std::string& dir, int target, const std::string& transcript_path,
              std::ostream& out, std::ostream& err) {
  const fs::path root(dir);
  std::vector<std::string> names;
  RankedAUs ranked;
  std::string video_id = root.filename().string();
  const fs::path ann_path = root / "annotations.json";
  if (fs::exists(ann_path)) {
    json ann;
    try {
      ann = json::parse(read_text(ann_path));
      video_id = ann.at("video_id").get<std::string>();
      for (const auto& f : ann.at("frames")) names.push_back(f.at("image").get<std::string>());
      bool found = false;
      for (const auto& t : ann.at("tracks")) {
        if (t.at("face_id").get<int>() != target) continue;
        found = true;
        for (const auto& r : t.at("ranked_aus")) ranked.push_back({r.at("au_id").get<int>(), r.at("score").get<double>()});
      }
      if (!found) throw DataError("face " + std::to_string(target) + " is not tracked in " + ann_path.string());
    } catch (const json::exception& e) {
      throw DataError(ann_path.string() + ": " + e.what());
    }
  } else {
    for (const auto& e : fs::directory_iterator(root)) {
      if (e.path().extension() == ".png") names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
  }
  if (names.empty()) throw DataError("no frames in " + dir);

  std::vector<Image> images;
  for (const auto& n : names) images.push_back(read_png((root / n).string()));

  auto backend = make_backend(c);
  const PromptContext ctx{*c.pipeline.catalog, *c.pipeline.templates, c.pipeline.mode,
                          static_cast<int>(images.size())};
  TranscriptLog log;
  auto flush = [&] {
    for (auto& e : log) e.video_id = video_id;
    if (!transcript_path.empty()) write_text(transcript_path, transcript_text(log));
  };
  try {
    const VotedChain voted = run_chain_voted(encode_for_model(images, c.pipeline), target, ranked, *backend, ctx,
                                             c.pipeline.chain, &log);
    flush();
    out << "label: " << prediction_name(voted.prediction) << "\n";
    return kExitOk;
  } catch (const ChainAbort& e) {
    flush();
    err << "chain aborted at " << to_string(e.failed_stage()) << " after " << e.partial().records.size()
        << " completed stage(s): " << e.what() << "\n";
    out << "label: " << prediction_name(std::nullopt) << "\n";
    return kExitBackend;
  }
}

int cmd_eval(CliConfig& c, const std::string& manifest_path, bool strict_paths, const std::string& records_path,
             const std::string& transcript_path, const std::string& report_path, std::ostream& out,
             std::ostream& err) {
  const auto manifest = load_manifest(manifest_path, strict_paths);
  if (manifest.empty()) throw DataError(manifest_path + ": manifest has no entries");
  auto backend = make_backend(c);
  const PipelineResult result = run_pipeline(manifest, c.pipeline, *backend);
  write_records(records_path, result.records);
  if (!transcript_path.empty()) write_text(transcript_path, transcript_text(result.transcript));

  const Report report = evaluate(result.records, *parse_f1_averaging(c.f1));
  if (!report_path.empty()) write_text(report_path, emit_report(report, "json"));
  out << emit_report(report, "table");

  bool backend_failed = false, data_failed = false;
  for (const auto& r : result.records) {
    if (r.error.empty()) continue;
    err << r.video_id << ": " << r.error_kind << " error: " << r.error << "\n";
    backend_failed |= r.error_kind == "backend";
    data_failed |= r.error_kind != "backend";
  }
  return backend_failed ? kExitBackend : data_failed ? kExitData : kExitOk;
}

int cmd_report(const CliConfig& c, const std::string& records_path, const std::string& format,
               const std::string& out_path, std::ostream& out) {
  const auto records = read_records(records_path);
  if (records.empty()) throw DataError(records_path + ": no records");
  const Report report = evaluate(records, *parse_f1_averaging(c.f1));
  const std::string doc = emit_report(report, format);
  if (out_path.empty()) {
    out << doc;
  } else {
    write_text(out_path, doc);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Set-of-Vision-Text prompting toolkit", "sovtp"};
  app.set_version_flag("--version", SOVTP_VERSION);
  app.require_subcommand(1);
  CliConfig c;

  std::string sidecar, frames_dir, out_dir, chain_dir, transcript, manifest, records, report_json, format = "table",
                                                                                                       report_out;
  int target = 1;
  bool allow_missing = false;

  auto* annotate = app.add_subcommand("annotate", "Draw overlays on a video's frames");
  annotate->add_option("--sidecar", sidecar, "Detection sidecar JSON")->required();
  annotate->add_option("--frames-dir", frames_dir, "Directory of source frames")->required();
  annotate->add_option("-o,--out", out_dir, "Output directory")->required();
  add_analysis_options(annotate, c);

  auto* chain = app.add_subcommand("chain", "Run the prompt chain on annotated frames");
  chain->add_option("--annotated", chain_dir, "Output directory of `annotate`")->required();
  chain->add_option("--target", target, "Target face number")->check(CLI::PositiveNumber)->required();
  chain->add_option("--transcript", transcript, "Transcript output (JSONL)");
  add_chain_options(chain, c);

  auto* eval = app.add_subcommand("eval", "Run every manifest entry and write records");
  eval->add_option("--manifest", manifest, "Manifest (JSONL)")->required();
  eval->add_option("--records", records, "Records output (JSONL)")->required();
  eval->add_option("--transcript", transcript, "Transcript output (JSONL)");
  eval->add_option("--report", report_json, "Report output (JSON)");
  eval->add_flag("--allow-missing", allow_missing, "Accept missing paths and record those entries as errors");
  eval->add_option("-j,--parallelism", c.pipeline.parallelism, "Concurrent entries")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  add_analysis_options(eval, c);
  add_chain_options(eval, c);

  auto* report = app.add_subcommand("report", "Summarize a records file");
  report->add_option("--records", records, "Records (JSONL)")->required();
  report->add_option("--format", format, "json | table | markdown")->capture_default_str();
  report->add_option("-o,--out", report_out, "Write to a file instead of stdout");

  for (auto* cmd : {eval, report}) {
    cmd->add_option("--f1", c.f1, "F1 averaging: macro | micro")
        ->check(CLI::IsMember({"macro", "micro"}))
        ->capture_default_str();
  }

  auto* validate = app.add_subcommand("validate", "Check a detection sidecar and list violations");
  validate->add_option("--sidecar", sidecar, "Detection sidecar JSON")->required();

  std::vector<const char*> argv{"sovtp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(sidecar, out);
    finalize(c);
    const std::string name = app.get_subcommands().front()->get_name();
    print_header(err, name, c);
    if (*annotate) return cmd_annotate(c, sidecar, frames_dir, out_dir, out);
    if (*chain) return cmd_chain(c, chain_dir, target, transcript, out, err);
    if (*eval) return cmd_eval(c, manifest, !allow_missing, records, transcript, report_json, out, err);
    return cmd_report(c, records, format, report_out, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SidecarError& e) {
    err << "invalid sidecar:\n";
    for (const auto& v : e.violations()) err << "  " << v.to_string() << "\n";
    return kExitData;
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const ContractViolation& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace sovtp
