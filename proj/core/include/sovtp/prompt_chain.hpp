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

#pragma once

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sovtp/au_catalog.hpp"
#include "sovtp/emotion.hpp"
#include "sovtp/errors.hpp"
#include "sovtp/vllm_client.hpp"

namespace sovtp {

// Execution order is the enumerator order.
enum class StageId {
  kContext = 1,
  kBodyLanguage = 2,
  kOthersEmotions = 3,
  kActionUnits = 4,
  kSelfCorrection = 5,
};

inline constexpr std::array<StageId, 5> kStageOrder = {
    StageId::kContext, StageId::kBodyLanguage, StageId::kOthersEmotions, StageId::kActionUnits,
    StageId::kSelfCorrection,
};

// Order in which earlier answers are laid out for the final stage:
// context, body language, action units, others' emotions.
inline constexpr std::array<StageId, 4> kCompositeOrder = {
    StageId::kContext, StageId::kBodyLanguage, StageId::kActionUnits, StageId::kOthersEmotions,
};

std::string_view to_string(StageId stage) noexcept;
std::optional<StageId> parse_stage(std::string_view name) noexcept;
inline int stage_index(StageId s) noexcept { return static_cast<int>(s); }

// Which stages a run executes. kPlain is the single-question baseline; the
// others add the ablation components cumulatively.
enum class PromptMode { kPlain, kMuscle, kMuscleContext, kMuscleContextBody, kSovtp };

std::string_view to_string(PromptMode mode) noexcept;
std::optional<PromptMode> parse_prompt_mode(std::string_view name) noexcept;
std::vector<StageId> stages_for(PromptMode mode);

inline constexpr std::array<std::string_view, 4> kTemplatePlaceholders = {
    "target_id", "prior_answers", "au_list", "frame_count"};

class TemplateSet {
 public:
  static const TemplateSet& builtin();
  static std::string_view builtin_text();
  static TemplateSet parse(std::string_view json_text);
  static TemplateSet load(const std::string& path);

  const std::string& system_prompt() const noexcept { return system_; }
  const std::string& stage_template(StageId stage) const;
  const std::string& plain_template() const noexcept { return plain_; }
  // Plain mode asks its single question with the plain template.
  const std::string& template_for(StageId stage, PromptMode mode) const;

 private:
  std::string system_;
  std::map<StageId, std::string> stages_;
  std::string plain_;
};

// Substitutes {name} placeholders. Unknown or unbound names throw DataError.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& bindings);

struct StageRecord {
  StageId stage = StageId::kContext;
  std::string question;
  std::string reasoning;
  std::string answer;
};

struct ChainState {
  int target_face_id = 0;
  std::vector<StageRecord> records;  // a prefix of the mode's stage order
  std::optional<EmotionLabel> final_label;

  bool complete() const noexcept {
    return !records.empty() && records.back().stage == StageId::kSelfCorrection;
  }
  const StageRecord* find(StageId stage) const noexcept;
};

struct PromptContext {
  const AuCatalog& catalog;
  const TemplateSet& templates;
  PromptMode mode = PromptMode::kSovtp;
  int frame_count = 1;
};

class SequencingError : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

// "AU6 (Cheek Raiser), AU12 (Lip Corner Puller)" in rank order.
std::string format_au_list(const RankedAUs& ranked, const AuCatalog& catalog);
std::string format_prior_answers(const ChainState& state);

std::string build_stage_prompt(StageId stage, const ChainState& state, const RankedAUs& ranked,
                               const PromptContext& ctx);

struct SplitResponse {
  std::string reasoning;
  std::string answer;
};

// Splits on the REASONING:/ANSWER: markers; without an ANSWER: marker the
// whole text is the answer and reasoning is empty.
SplitResponse split_response(std::string_view text);

// Whole-word, case-insensitive search for emotion words. Exactly one label
// family must match, otherwise the answer is Unparseable (nullopt).
Prediction parse_emotion(std::string_view answer);

struct ChainParams {
  std::string model;
  int max_tokens = 1024;
  double temperature = 0.0;
  RetryPolicy retry{1, 1.0, 30.0};  // per stage, on top of the backend's own policy
  Sleeper sleep = real_sleeper();
  int num_trajectories = 1;
};

struct TranscriptEntry {
  std::string video_id;
  int target_face_id = 0;
  int trajectory = 0;
  StageId stage = StageId::kContext;
  int attempt = 1;
  std::string request_hash;
  std::string prompt;
  std::string response;
  std::string reasoning;
  std::string answer;
  double latency_seconds = 0.0;
  std::string error;
};

using TranscriptLog = std::vector<TranscriptEntry>;

// One JSON object per line, keys sorted.
std::string to_jsonl(const TranscriptEntry& entry);

class ChainAbort : public std::runtime_error {
 public:
  ChainAbort(ChainState partial, StageId failed_stage, const BackendError& cause);

  const ChainState& partial() const noexcept { return partial_; }
  StageId failed_stage() const noexcept { return failed_stage_; }
  BackendErrorKind cause_kind() const noexcept { return cause_kind_; }

 private:
  ChainState partial_;
  StageId failed_stage_;
  BackendErrorKind cause_kind_;
};

// Runs the mode's stages in order, attaching every frame to every request.
// Throws ChainAbort with the completed records when a stage keeps failing.
ChainState run_chain(const std::vector<std::string>& frames_base64_png, int target_face_id,
                     const RankedAUs& ranked, Backend& backend, const PromptContext& ctx,
                     const ChainParams& params, TranscriptLog* log = nullptr, int trajectory = 0);

struct VotedChain {
  std::vector<ChainState> trajectories;
  Prediction prediction;
};

// Majority vote over params.num_trajectories independent runs; ties go to
// the label reached first. Unparseable trajectories do not vote.
VotedChain run_chain_voted(const std::vector<std::string>& frames_base64_png, int target_face_id,
                           const RankedAUs& ranked, Backend& backend, const PromptContext& ctx,
                           const ChainParams& params, TranscriptLog* log = nullptr);

}  // namespace sovtp
