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

#include "sovtp/au_catalog.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "builtin_data.hpp"
#include "json.hpp"

namespace sovtp {

using nlohmann::json;

CatalogMiss::CatalogMiss(int au_id)
    : std::out_of_range("AU" + std::to_string(au_id) + " is not in the action-unit catalog"),
      au_id_(au_id) {}

AuCatalog::AuCatalog(std::vector<AuCatalogEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const auto& a, const auto& b) { return a.au_id < b.au_id; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.au_id <= 0) throw DataError("catalog: AU id must be positive");
    if (i > 0 && entries_[i - 1].au_id == e.au_id) {
      throw DataError("catalog: duplicate AU" + std::to_string(e.au_id));
    }
    if (e.name.empty()) throw DataError("catalog: AU" + std::to_string(e.au_id) + " has no name");
    if (e.landmark_indices.empty()) {
      throw DataError("catalog: AU" + std::to_string(e.au_id) + " has no landmark anchors");
    }
    for (int idx : e.landmark_indices) {
      if (idx < 0 || idx >= static_cast<int>(kLandmarkCount)) {
        throw DataError("catalog: AU" + std::to_string(e.au_id) + " landmark index " +
                        std::to_string(idx) + " outside 0-67");
      }
    }
  }
}

std::string_view AuCatalog::builtin_text() { return detail::builtin_au_catalog_json(); }

const AuCatalog& AuCatalog::builtin() {
  static const AuCatalog catalog = parse(builtin_text());
  return catalog;
}

AuCatalog AuCatalog::parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("catalog: malformed JSON: ") + e.what());
  }
  try {
    if (doc.value("format", "") != "sovtp-au-catalog") {
      throw DataError("catalog: missing or wrong \"format\" tag");
    }
    const int version = doc.at("version").get<int>();
    if (version != 1) throw DataError("catalog: unsupported version " + std::to_string(version));

    std::vector<AuCatalogEntry> entries;
    for (const auto& rec : doc.at("action_units")) {
      AuCatalogEntry e;
      e.au_id = rec.at("id").get<int>();
      e.name = rec.at("name").get<std::string>();
      e.landmark_indices = rec.at("landmarks").get<std::vector<int>>();
      for (const auto& name : rec.at("emotions")) {
        auto label = parse_label(name.get<std::string>());
        if (!label) {
          throw DataError("catalog: AU" + std::to_string(e.au_id) + " lists unknown emotion '" +
                          name.get<std::string>() + "'");
        }
        if (*label == EmotionLabel::kNeutral) {
          throw DataError("catalog: Neutral carries no action units");
        }
        e.member_emotions.insert(*label);
      }
      e.name_source = rec.value("name_source", "");
      entries.push_back(std::move(e));
    }
    AuCatalog catalog(std::move(entries));
    catalog.version_ = version;
    return catalog;
  } catch (const json::exception& e) {
    throw DataError(std::string("catalog: schema error: ") + e.what());
  }
}

AuCatalog AuCatalog::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("catalog: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const AuCatalogEntry* AuCatalog::find(int au_id) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), au_id,
                             [](const AuCatalogEntry& e, int id) { return e.au_id < id; });
  if (it == entries_.end() || it->au_id != au_id) return nullptr;
  return &*it;
}

const AuCatalogEntry& AuCatalog::at(int au_id) const {
  if (const auto* e = find(au_id)) return *e;
  throw CatalogMiss(au_id);
}

std::set<int> AuCatalog::aus_for_emotion(EmotionLabel e) const {
  std::set<int> ids;
  for (const auto& entry : entries_) {
    if (entry.member_emotions.contains(e)) ids.insert(entry.au_id);
  }
  return ids;
}

namespace {

RankedAUs top_k(std::vector<RankedAu> items, int k) {
  std::sort(items.begin(), items.end(), [](const RankedAu& a, const RankedAu& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.au_id < b.au_id;
  });
  if (items.size() > static_cast<std::size_t>(k)) items.resize(static_cast<std::size_t>(k));
  return items;
}

}  // namespace

RankedAUs AuCatalog::rank_aus(const std::map<int, double>& scores, std::optional<EmotionLabel> hint,
                              double tau, int k) const {
  if (k <= 0) throw ContractViolation("rank_aus: k must be positive");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ContractViolation("rank_aus: tau must lie in [0, 1]");

  std::vector<RankedAu> known;
  for (const auto& [id, score] : scores) {
    if (!(score >= 0.0 && score <= 1.0)) {
      throw ContractViolation("rank_aus: AU" + std::to_string(id) + " score outside [0, 1]");
    }
    if (contains(id)) known.push_back({id, score});
  }
  if (known.empty()) return {};

  const std::set<int> allowed = hint ? aus_for_emotion(*hint) : std::set<int>{};
  std::vector<RankedAu> candidates;
  for (const auto& item : known) {
    if (hint && !allowed.contains(item.au_id)) continue;
    if (item.score >= tau) candidates.push_back(item);
  }
  if (!candidates.empty()) return top_k(std::move(candidates), k);
  return top_k(std::move(known), k);
}

Point AuCatalog::au_anchor(int au_id, std::span<const Point> landmarks) const {
  const auto& entry = at(au_id);
  if (landmarks.size() != kLandmarkCount) {
    throw ContractViolation("au_anchor: expected 68 landmarks, got " +
                            std::to_string(landmarks.size()));
  }
  double sx = 0.0;
  double sy = 0.0;
  for (int idx : entry.landmark_indices) {
    sx += landmarks[static_cast<std::size_t>(idx)].x;
    sy += landmarks[static_cast<std::size_t>(idx)].y;
  }
  const double n = static_cast<double>(entry.landmark_indices.size());
  return {sx / n, sy / n};
}

std::string AuCatalog::to_json() const {
  json doc;
  doc["format"] = "sovtp-au-catalog";
  doc["version"] = version_;
  doc["action_units"] = json::array();
  for (const auto& e : entries_) {
    json rec;
    rec["id"] = e.au_id;
    rec["name"] = e.name;
    rec["landmarks"] = e.landmark_indices;
    json emotions = json::array();
    for (auto label : e.member_emotions) emotions.push_back(std::string(to_string(label)));
    rec["emotions"] = emotions;
    if (!e.name_source.empty()) rec["name_source"] = e.name_source;
    doc["action_units"].push_back(rec);
  }
  return doc.dump(2);
}

}  // namespace sovtp
