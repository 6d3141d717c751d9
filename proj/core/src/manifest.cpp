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

#include "sovtp/manifest.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sovtp {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Tier tier) noexcept {
  switch (tier) {
    case Tier::kEasy: return "Easy";
    case Tier::kMedium: return "Medium";
    case Tier::kHard: return "Hard";
  }
  return "unknown";
}

std::optional<Tier> parse_tier(std::string_view name) noexcept {
  std::string low(name);
  for (auto& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (low == "easy") return Tier::kEasy;
  if (low == "medium") return Tier::kMedium;
  if (low == "hard") return Tier::kHard;
  return std::nullopt;
}

Tier tier_for_face_count(int visible_faces) noexcept {
  if (visible_faces > 6) return Tier::kEasy;
  if (visible_faces > 3) return Tier::kMedium;
  return Tier::kHard;
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path.lexically_normal().string();
  return (fs::path(base_dir) / path).lexically_normal().string();
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::string& base_dir,
                                          bool check_paths) {
  std::vector<ManifestEntry> entries;
  std::set<std::string> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "manifest line " + std::to_string(line_no);

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ManifestError(where + ": malformed JSON: " + e.what());
    }
    if (!rec.is_object()) throw ManifestError(where + ": entry must be a JSON object");

    ManifestEntry entry;
    auto text_field = [&](const char* key) {
      if (!rec.contains(key) || !rec[key].is_string() || rec[key].get<std::string>().empty()) {
        throw ManifestError(where + ": field '" + key + "' must be a non-empty string");
      }
      return rec[key].get<std::string>();
    };
    entry.video_id = text_field("video_id");
    const std::string named = where + " (video '" + entry.video_id + "')";
    entry.frames_dir = resolve(base_dir, text_field("frames_dir"));
    entry.sidecar_path = resolve(base_dir, text_field("sidecar"));

    if (!rec.contains("target_face_id") || !rec["target_face_id"].is_number_integer() ||
        rec["target_face_id"].get<long long>() <= 0) {
      throw ManifestError(named + ": target_face_id must be a positive integer");
    }
    entry.target_face_id = rec["target_face_id"].get<int>();

    const std::string label = text_field("label");
    auto truth = parse_label(label);
    if (!truth) throw ManifestError(named + ": unknown emotion label '" + label + "'");
    entry.ground_truth = *truth;

    const std::string tier = text_field("tier");
    auto parsed_tier = parse_tier(tier);
    if (!parsed_tier) throw ManifestError(named + ": unknown tier '" + tier + "'");
    entry.tier = *parsed_tier;

    if (!ids.insert(entry.video_id).second) {
      throw ManifestError(named + ": duplicate video id");
    }
    if (check_paths) {
      if (!fs::is_directory(entry.frames_dir)) {
        throw ManifestError(named + ": frames_dir '" + entry.frames_dir + "' does not exist");
      }
      if (!fs::is_regular_file(entry.sidecar_path)) {
        throw ManifestError(named + ": sidecar '" + entry.sidecar_path + "' does not exist");
      }
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::string& path, bool check_paths) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot open manifest " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), fs::path(path).parent_path().string(), check_paths);
}

}  // namespace sovtp
