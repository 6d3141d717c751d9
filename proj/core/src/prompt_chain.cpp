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

#include "sovtp/prompt_chain.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "json.hpp"

namespace sovtp {

using nlohmann::json;

const StageRecord* ChainState::find(StageId stage) const noexcept {
  for (const auto& r : records) {
    if (r.stage == stage) return &r;
  }
  return nullptr;
}

std::string format_au_list(const RankedAUs& ranked, const AuCatalog& catalog) {
  if (ranked.empty()) return "none detected";
  std::string out;
  for (const auto& au : ranked) {
    if (!out.empty()) out += ", ";
    out += "AU" + std::to_string(au.au_id) + " (" + catalog.at(au.au_id).name + ")";
  }
  return out;
}

namespace {

std::string_view prior_heading(StageId stage) {
  switch (stage) {
    case StageId::kContext: return "Context";
    case StageId::kBodyLanguage: return "Body language";
    case StageId::kActionUnits: return "Facial action units";
    case StageId::kOthersEmotions: return "Others' emotions";
    case StageId::kSelfCorrection: break;
  }
  return "Final";
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string format_prior_answers(const ChainState& state) {
  std::string out;
  for (StageId stage : kCompositeOrder) {
    const StageRecord* rec = state.find(stage);
    if (rec == nullptr) continue;
    if (!out.empty()) out += "\n";
    out += "- " + std::string(prior_heading(stage)) + ": " + rec->answer;
  }
  return out.empty() ? "(nothing yet)" : out;
}

std::string build_stage_prompt(StageId stage, const ChainState& state, const RankedAUs& ranked,
                               const PromptContext& ctx) {
  const auto plan = stages_for(ctx.mode);
  auto pos = std::find(plan.begin(), plan.end(), stage);
  if (pos == plan.end()) {
    throw SequencingError("stage '" + std::string(to_string(stage)) + "' is not part of mode '" +
                          std::string(to_string(ctx.mode)) + "'");
  }
  const auto expected = static_cast<std::size_t>(pos - plan.begin());
  if (state.records.size() < expected) {
    throw SequencingError("stage '" + std::string(to_string(stage)) + "' needs the answer of stage '" +
                          std::string(to_string(plan[state.records.size()])) + "'");
  }
  for (std::size_t i = 0; i < expected; ++i) {
    if (state.records[i].stage != plan[i]) {
      throw SequencingError("chain records are out of order at position " + std::to_string(i));
    }
  }

  const std::map<std::string, std::string> bindings = {
      {"target_id", std::to_string(state.target_face_id)},
      {"prior_answers", format_prior_answers(state)},
      {"au_list", format_au_list(ranked, ctx.catalog)},
      {"frame_count", std::to_string(ctx.frame_count)},
  };
  return render_template(ctx.templates.template_for(stage, ctx.mode), bindings);
}

SplitResponse split_response(std::string_view text) {
  const std::string low = lower(text);
  const auto answer_at = low.rfind("answer:");
  if (answer_at == std::string::npos) return {"", std::string(text)};

  SplitResponse out;
  out.answer = std::string(trim(text.substr(answer_at + 7)));
  const auto reasoning_at = low.find("reasoning:");
  if (reasoning_at != std::string::npos && reasoning_at < answer_at) {
    out.reasoning = std::string(trim(text.substr(reasoning_at + 10, answer_at - reasoning_at - 10)));
  } else {
    out.reasoning = std::string(trim(text.substr(0, answer_at)));
  }
  return out;
}

Prediction parse_emotion(std::string_view answer) {
  static const std::map<std::string, EmotionLabel, std::less<>> kWords = {
      {"surprise", EmotionLabel::kSurprise},   {"surprised", EmotionLabel::kSurprise},
      {"fear", EmotionLabel::kFear},           {"fearful", EmotionLabel::kFear},
      {"afraid", EmotionLabel::kFear},         {"disgust", EmotionLabel::kDisgust},
      {"disgusted", EmotionLabel::kDisgust},   {"anger", EmotionLabel::kAnger},
      {"angry", EmotionLabel::kAnger},         {"happiness", EmotionLabel::kHappiness},
      {"happy", EmotionLabel::kHappiness},     {"sadness", EmotionLabel::kSadness},
      {"sad", EmotionLabel::kSadness},         {"neutral", EmotionLabel::kNeutral},
      {"calm", EmotionLabel::kNeutral},
  };
  std::set<EmotionLabel> found;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (auto it = kWords.find(word); it != kWords.end()) found.insert(it->second);
    word.clear();
  };
  for (char c : answer) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc)) {
      word.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      flush();
    }
  }
  flush();
  if (found.size() != 1) return std::nullopt;
  return *found.begin();
}

std::string to_jsonl(const TranscriptEntry& e) {
  json rec = {
      {"video_id", e.video_id},
      {"target_face_id", e.target_face_id},
      {"trajectory", e.trajectory},
      {"stage", std::string(to_string(e.stage))},
      {"stage_index", stage_index(e.stage)},
      {"attempt", e.attempt},
      {"request_hash", e.request_hash},
      {"prompt", e.prompt},
      {"response", e.response},
      {"reasoning", e.reasoning},
      {"answer", e.answer},
      {"latency_seconds", e.latency_seconds},
      {"error", e.error},
  };
  return rec.dump();
}

ChainAbort::ChainAbort(ChainState partial, StageId failed_stage, const BackendError& cause)
    : std::runtime_error("chain aborted at stage '" + std::string(to_string(failed_stage)) +
                         "': " + cause.what()),
      partial_(std::move(partial)),
      failed_stage_(failed_stage),
      cause_kind_(cause.kind()) {}

ChainState run_chain(const std::vector<std::string>& frames, int target_face_id,
                     const RankedAUs& ranked, Backend& backend, const PromptContext& ctx,
                     const ChainParams& params, TranscriptLog* log, int trajectory) {
  if (frames.empty()) throw ContractViolation("run_chain needs at least one frame");
  if (target_face_id <= 0) throw ContractViolation("target face id must be positive");

  ChainState state;
  state.target_face_id = target_face_id;

  for (StageId stage : stages_for(ctx.mode)) {
    const std::string prompt = build_stage_prompt(stage, state, ranked, ctx);

    ChatRequest req;
    req.model = params.model;
    req.max_tokens = params.max_tokens;
    req.temperature = params.temperature;
    req.stage_index = stage_index(stage);
    if (!ctx.templates.system_prompt().empty()) {
      req.messages.push_back({"system", ctx.templates.system_prompt(), {}});
    }
    req.messages.push_back({"user", prompt, frames});
    const std::string hash = request_hash(req);

    auto entry_for = [&](int attempt) {
      TranscriptEntry e;
      e.target_face_id = target_face_id;
      e.trajectory = trajectory;
      e.stage = stage;
      e.attempt = attempt;
      e.request_hash = hash;
      e.prompt = prompt;
      return e;
    };

    Completion completion;
    int final_attempt = 1;
    try {
      completion = call_with_retries(
          params.retry, params.sleep,
          [&](int attempt) {
            final_attempt = attempt;
            return backend.complete(req);
          },
          [&](int attempt, const BackendError& err) {
            if (log == nullptr) return;
            auto e = entry_for(attempt);
            e.error = err.what();
            log->push_back(std::move(e));
          });
    } catch (const BackendError& err) {
      throw ChainAbort(state, stage, err);
    }

    SplitResponse parts = split_response(completion.text);
    if (log != nullptr) {
      auto e = entry_for(final_attempt);
      e.response = completion.text;
      e.reasoning = parts.reasoning;
      e.answer = parts.answer;
      e.latency_seconds = completion.latency_seconds;
      log->push_back(std::move(e));
    }
    state.records.push_back({stage, prompt, std::move(parts.reasoning), std::move(parts.answer)});
  }

  state.final_label = parse_emotion(state.records.back().answer);
  return state;
}

VotedChain run_chain_voted(const std::vector<std::string>& frames, int target_face_id,
                           const RankedAUs& ranked, Backend& backend, const PromptContext& ctx,
                           const ChainParams& params, TranscriptLog* log) {
  if (params.num_trajectories < 1) throw ContractViolation("num_trajectories must be >= 1");
  VotedChain out;
  std::vector<EmotionLabel> first_seen;
  std::map<EmotionLabel, int> votes;
  for (int t = 0; t < params.num_trajectories; ++t) {
    out.trajectories.push_back(run_chain(frames, target_face_id, ranked, backend, ctx, params, log, t));
    if (auto label = out.trajectories.back().final_label) {
      if (votes[*label]++ == 0) first_seen.push_back(*label);
    }
  }
  int best = 0;
  for (EmotionLabel label : first_seen) {
    if (votes[label] > best) {
      best = votes[label];
      out.prediction = label;
    }
  }
  return out;
}

}  // namespace sovtp
