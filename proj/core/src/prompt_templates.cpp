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

#include <algorithm>
#include <fstream>
#include <sstream>

#include "builtin_data.hpp"
#include "json.hpp"
#include "sovtp/prompt_chain.hpp"

namespace sovtp {

using nlohmann::json;

std::string_view to_string(StageId stage) noexcept {
  switch (stage) {
    case StageId::kContext: return "context";
    case StageId::kBodyLanguage: return "body_language";
    case StageId::kOthersEmotions: return "others_emotions";
    case StageId::kActionUnits: return "action_units";
    case StageId::kSelfCorrection: return "self_correction";
  }
  return "unknown";
}

std::optional<StageId> parse_stage(std::string_view name) noexcept {
  for (auto s : kStageOrder) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(PromptMode mode) noexcept {
  switch (mode) {
    case PromptMode::kPlain: return "plain";
    case PromptMode::kMuscle: return "muscle";
    case PromptMode::kMuscleContext: return "muscle+context";
    case PromptMode::kMuscleContextBody: return "muscle+context+body";
    case PromptMode::kSovtp: return "sovtp";
  }
  return "unknown";
}

std::optional<PromptMode> parse_prompt_mode(std::string_view name) noexcept {
  for (auto m : {PromptMode::kPlain, PromptMode::kMuscle, PromptMode::kMuscleContext,
                 PromptMode::kMuscleContextBody, PromptMode::kSovtp}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::vector<StageId> stages_for(PromptMode mode) {
  switch (mode) {
    case PromptMode::kPlain:
      return {StageId::kSelfCorrection};
    case PromptMode::kMuscle:
      return {StageId::kActionUnits, StageId::kSelfCorrection};
    case PromptMode::kMuscleContext:
      return {StageId::kContext, StageId::kActionUnits, StageId::kSelfCorrection};
    case PromptMode::kMuscleContextBody:
      return {StageId::kContext, StageId::kBodyLanguage, StageId::kActionUnits,
              StageId::kSelfCorrection};
    case PromptMode::kSovtp:
      return {kStageOrder.begin(), kStageOrder.end()};
  }
  return {};
}

namespace {

// Calls `visit(name)` for each {name} in the template; returns false on an
// unterminated brace.
template <class Visit>
bool scan_placeholders(std::string_view tmpl, Visit&& visit) {
  std::size_t pos = 0;
  while ((pos = tmpl.find('{', pos)) != std::string_view::npos) {
    const auto close = tmpl.find('}', pos + 1);
    if (close == std::string_view::npos) return false;
    visit(tmpl.substr(pos + 1, close - pos - 1), pos, close);
    pos = close + 1;
  }
  return true;
}

void check_placeholders(std::string_view tmpl, const std::string& where) {
  const bool ok = scan_placeholders(tmpl, [&](std::string_view name, std::size_t, std::size_t) {
    if (std::find(kTemplatePlaceholders.begin(), kTemplatePlaceholders.end(), name) ==
        kTemplatePlaceholders.end()) {
      throw DataError("templates: " + where + " uses unknown placeholder {" + std::string(name) + "}");
    }
  });
  if (!ok) throw DataError("templates: " + where + " has an unterminated '{'");
}

}  // namespace

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& bindings) {
  std::string out;
  std::size_t copied = 0;
  const bool ok = scan_placeholders(tmpl, [&](std::string_view name, std::size_t open, std::size_t close) {
    auto it = bindings.find(std::string(name));
    if (it == bindings.end()) throw DataError("template placeholder {" + std::string(name) + "} is unbound");
    out.append(tmpl.substr(copied, open - copied));
    out.append(it->second);
    copied = close + 1;
  });
  if (!ok) throw DataError("template has an unterminated '{'");
  out.append(tmpl.substr(copied));
  return out;
}

std::string_view TemplateSet::builtin_text() { return detail::builtin_templates_json(); }

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = parse(builtin_text());
  return set;
}

TemplateSet TemplateSet::parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("templates: malformed JSON: ") + e.what());
  }
  TemplateSet set;
  try {
    if (doc.value("format", "") != "sovtp-prompt-templates") {
      throw DataError("templates: missing or wrong \"format\" tag");
    }
    if (doc.at("version").get<int>() != 1) throw DataError("templates: unsupported version");
    set.system_ = doc.value("system", "");
    for (const auto& rec : doc.at("templates")) {
      const std::string name = rec.at("stage").get<std::string>();
      const std::string text = rec.at("text").get<std::string>();
      if (text.empty()) throw DataError("templates: stage '" + name + "' is empty");
      check_placeholders(text, "stage '" + name + "'");
      if (name == "plain") {
        if (!set.plain_.empty()) throw DataError("templates: duplicate plain template");
        set.plain_ = text;
        continue;
      }
      auto stage = parse_stage(name);
      if (!stage) throw DataError("templates: unknown stage '" + name + "'");
      if (!set.stages_.emplace(*stage, text).second) {
        throw DataError("templates: duplicate stage '" + name + "'");
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("templates: schema error: ") + e.what());
  }
  for (auto s : kStageOrder) {
    if (!set.stages_.contains(s)) {
      throw DataError("templates: missing stage '" + std::string(to_string(s)) + "'");
    }
  }
  if (set.plain_.empty()) throw DataError("templates: missing plain template");
  return set;
}

TemplateSet TemplateSet::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("templates: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const std::string& TemplateSet::stage_template(StageId stage) const { return stages_.at(stage); }

const std::string& TemplateSet::template_for(StageId stage, PromptMode mode) const {
  if (mode == PromptMode::kPlain && stage == StageId::kSelfCorrection) return plain_;
  return stage_template(stage);
}

}  // namespace sovtp
