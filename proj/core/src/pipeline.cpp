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

#include "sovtp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

#include "sovtp/encoding.hpp"
#include "sovtp/errors.hpp"

namespace sovtp {

namespace fs = std::filesystem;

std::pair<int, int> fit_pixel_budget(int width, int height, const PixelBudget& budget) {
  if (width <= 0 || height <= 0) throw ContractViolation("fit_pixel_budget: empty image");
  if (budget.max_patches <= 0) return {width, height};
  if (budget.patch_size <= 0 || budget.min_patches < 0 || budget.min_patches > budget.max_patches) {
    throw ContractViolation("invalid pixel budget");
  }
  const double patch = budget.patch_size;
  const double min_px = budget.min_patches * patch * patch;
  const double max_px = budget.max_patches * patch * patch;
  const double w = width, h = height;
  double wb = std::max(patch, std::round(w / patch) * patch);
  double hb = std::max(patch, std::round(h / patch) * patch);
  if (wb * hb > max_px) {
    const double beta = std::sqrt(w * h / max_px);
    wb = std::max(patch, std::floor(w / beta / patch) * patch);
    hb = std::max(patch, std::floor(h / beta / patch) * patch);
  } else if (wb * hb < min_px) {
    const double beta = std::sqrt(min_px / (w * h));
    wb = std::ceil(w * beta / patch) * patch;
    hb = std::ceil(h * beta / patch) * patch;
  }
  return {static_cast<int>(wb), static_cast<int>(hb)};
}

std::vector<int> sample_frame_indices(int available, int count) {
  if (available < 0 || count < 0) throw ContractViolation("sample_frame_indices: negative size");
  std::vector<int> picks;
  if (count == 0 || count >= available) {
    for (int i = 0; i < available; ++i) picks.push_back(i);
    return picks;
  }
  for (int i = 0; i < count; ++i) {
    const long long num = static_cast<long long>(2 * i + 1) * available;
    picks.push_back(static_cast<int>(num / (2LL * count)));
  }
  return picks;
}

namespace {

FaceObservation scale_observation(const FaceObservation& obs, double sx, double sy) {
  FaceObservation out = obs;
  out.box = obs.box.scaled(sx, sy);
  for (auto& p : out.landmarks) p = {p.x * sx, p.y * sy};
  return out;
}

Image binarize_mask(const Image& mask) {
  Image out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const Rgb c = mask.at(x, y);
      if (c.r > 127 || c.g > 127 || c.b > 127) out.set(x, y, {255, 255, 255});
    }
  }
  return out;
}

}  // namespace

AnnotatedVideo annotate_video(const SidecarDocument& sidecar, const std::string& frames_dir,
                              const PipelineConfig& cfg) {
  AnnotatedVideo video;
  video.video_id = sidecar.video_id;

  const bool normalize = cfg.frame_width > 0 && cfg.frame_height > 0;
  const int out_w = normalize ? cfg.frame_width : sidecar.frame_width;
  const int out_h = normalize ? cfg.frame_height : sidecar.frame_height;
  const double sx = static_cast<double>(out_w) / sidecar.frame_width;
  const double sy = static_cast<double>(out_h) / sidecar.frame_height;

  const auto picks =
      sample_frame_indices(static_cast<int>(sidecar.frames.size()), cfg.frame_sample_count);

  std::vector<FrameFaces> per_frame;
  std::vector<Image> sources;
  for (int pos : picks) {
    const SidecarFrame& frame = sidecar.frames[static_cast<std::size_t>(pos)];
    Image img = read_png((fs::path(frames_dir) / frame.image).string());
    if (img.width() != sidecar.frame_width || img.height() != sidecar.frame_height) {
      throw DataError(frame.image + " is " + std::to_string(img.width()) + "x" +
                      std::to_string(img.height()) + " but the sidecar declares " +
                      std::to_string(sidecar.frame_width) + "x" + std::to_string(sidecar.frame_height));
    }
    std::vector<FaceObservation> faces;
    for (const auto& d : frame.detections) faces.push_back(scale_observation(d, sx, sy));

    AnnotatedFrame af;
    af.frame_index = frame.frame_index;
    af.detected = faces.size();
    auto kept = resolve_overlaps(faces, cfg.epsilon, cfg.overlap_check);
    af.kept = kept.size();
    video.frames.push_back(std::move(af));
    per_frame.emplace_back(frame.frame_index, std::move(kept));
    sources.push_back(normalize ? resize(img, out_w, out_h) : std::move(img));
  }

  video.tracks = assign_ids(per_frame, cfg.iou_threshold);

  const MaskLoader load_mask = [&](const std::string& ref) {
    Image mask = read_png((fs::path(frames_dir) / ref).string());
    if (mask.width() != out_w || mask.height() != out_h) mask = resize(mask, out_w, out_h);
    return std::make_shared<const Image>(binarize_mask(mask));
  };

  for (std::size_t i = 0; i < video.frames.size(); ++i) {
    AnnotatedFrame& af = video.frames[i];
    std::map<int, RankedAUs> ranked;
    for (const auto& track : video.tracks) {
      auto it = track.observations.find(af.frame_index);
      if (it == track.observations.end()) continue;
      ranked[track.face_id] = cfg.catalog->rank_aus(it->second.au_scores,
                                                    it->second.dominant_emotion_hint, cfg.tau, cfg.top_k);
    }
    af.plan = plan_overlays(af.frame_index, video.tracks, ranked, *cfg.catalog, cfg.render, out_w,
                            out_h, load_mask);
    af.image = rasterize(af.plan, sources[i]);
  }
  return video;
}

RankedAUs target_ranked_aus(const TrackedFace& track, const AuCatalog& catalog, double tau, int k) {
  std::map<int, double> sums;
  std::map<int, int> counts;
  std::map<EmotionLabel, int> hint_votes;
  std::vector<EmotionLabel> hint_order;
  for (const auto& [frame, obs] : track.observations) {
    for (const auto& [id, score] : obs.au_scores) {
      sums[id] += score;
      counts[id] += 1;
    }
    if (obs.dominant_emotion_hint) {
      if (hint_votes[*obs.dominant_emotion_hint]++ == 0) hint_order.push_back(*obs.dominant_emotion_hint);
    }
  }
  std::map<int, double> mean;
  for (const auto& [id, total] : sums) mean[id] = std::clamp(total / counts[id], 0.0, 1.0);

  std::optional<EmotionLabel> hint;
  int best = 0;
  for (auto label : hint_order) {
    if (hint_votes[label] > best) {
      best = hint_votes[label];
      hint = label;
    }
  }
  return catalog.rank_aus(mean, hint, tau, k);
}

std::vector<std::string> encode_for_model(const std::vector<Image>& frames, const PipelineConfig& cfg) {
  std::vector<Image> batch;
  if (cfg.contact_sheet && frames.size() > 1) {
    batch.push_back(contact_sheet(frames));
  } else {
    batch = frames;
  }
  std::vector<std::string> out;
  for (const auto& img : batch) {
    const auto [w, h] = fit_pixel_budget(img.width(), img.height(), cfg.pixel_budget);
    const auto png = encode_png(w == img.width() && h == img.height() ? img : resize(img, w, h));
    out.push_back(base64_encode(png));
  }
  return out;
}

EntryOutcome run_entry(const ManifestEntry& entry, const PipelineConfig& cfg, Backend& backend) {
  EntryOutcome out;
  EvalRecord& rec = out.record;
  rec.video_id = entry.video_id;
  rec.tier = entry.tier;
  rec.ground_truth = entry.ground_truth;

  auto collect_latencies = [&] {
    for (auto& e : out.transcript) {
      e.video_id = entry.video_id;
      if (e.error.empty()) {
        rec.stage_latencies.push_back(e.latency_seconds);
        rec.total_seconds += e.latency_seconds;
      }
    }
  };

  try {
    const SidecarDocument sidecar = load_sidecar(entry.sidecar_path);
    AnnotatedVideo video = annotate_video(sidecar, entry.frames_dir, cfg);
    if (video.frames.empty()) throw DataError("video has no frames");

    auto track = std::find_if(video.tracks.begin(), video.tracks.end(),
                              [&](const TrackedFace& t) { return t.face_id == entry.target_face_id; });
    if (track == video.tracks.end()) {
      throw DataError("target face " + std::to_string(entry.target_face_id) + " was not tracked (" +
                      std::to_string(video.tracks.size()) + " tracks)");
    }
    const RankedAUs ranked = target_ranked_aus(*track, *cfg.catalog, cfg.tau, cfg.top_k);

    std::vector<Image> images;
    for (auto& f : video.frames) images.push_back(f.image);
    if (!cfg.annotated_dir.empty()) {
      const fs::path dir = fs::path(cfg.annotated_dir) / entry.video_id;
      fs::create_directories(dir);
      for (const auto& f : video.frames) write_png((dir / default_frame_name(f.frame_index)).string(), f.image);
    }

    const PromptContext ctx{*cfg.catalog, *cfg.templates, cfg.mode, static_cast<int>(images.size())};
    VotedChain voted = run_chain_voted(encode_for_model(images, cfg), entry.target_face_id, ranked,
                                       backend, ctx, cfg.chain, &out.transcript);
    rec.prediction = voted.prediction;
  } catch (const ChainAbort& e) {
    rec.prediction = std::nullopt;
    rec.error = e.what();
    rec.error_kind = "backend";
  } catch (const BackendError& e) {
    rec.prediction = std::nullopt;
    rec.error = e.what();
    rec.error_kind = "backend";
  } catch (const std::exception& e) {
    rec.prediction = std::nullopt;
    rec.error = e.what();
    rec.error_kind = "data";
  }
  collect_latencies();
  return out;
}

PipelineResult run_pipeline(const std::vector<ManifestEntry>& manifest, const PipelineConfig& cfg,
                            Backend& backend) {
  std::vector<EntryOutcome> outcomes(manifest.size());
  const int workers =
      std::max(1, std::min(cfg.parallelism, static_cast<int>(std::max<std::size_t>(1, manifest.size()))));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < manifest.size(); i = next++) {
      outcomes[i] = run_entry(manifest[i], cfg, backend);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  PipelineResult result;
  for (auto& o : outcomes) {
    result.records.push_back(std::move(o.record));
    for (auto& e : o.transcript) result.transcript.push_back(std::move(e));
  }
  return result;
}

}  // namespace sovtp
