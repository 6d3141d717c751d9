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

#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sovtp/emotion.hpp"
#include "sovtp/errors.hpp"
#include "sovtp/geometry.hpp"

namespace sovtp {

struct AuCatalogEntry {
  int au_id = 0;
  std::string name;  // FACS muscle-movement name, e.g. "Lip Corner Puller"
  std::vector<int> landmark_indices;
  std::set<EmotionLabel> member_emotions;
  // Where the name came from when the expression table does not list it.
  std::string name_source;
};

class CatalogMiss : public std::out_of_range {
 public:
  explicit CatalogMiss(int au_id);
  int au_id() const noexcept { return au_id_; }

 private:
  int au_id_;
};

struct RankedAu {
  int au_id = 0;
  double score = 0.0;

  friend bool operator==(const RankedAu&, const RankedAu&) = default;
};

// Ordered by non-increasing score; au_ids distinct.
using RankedAUs = std::vector<RankedAu>;

inline constexpr double kDefaultActivationThreshold = 0.5;
inline constexpr int kDefaultTopK = 3;

// Immutable action-unit catalog: emotion memberships plus landmark anchors.
class AuCatalog {
 public:
  // Six-expression table with the standard 68-point anchor regions.
  static const AuCatalog& builtin();
  static std::string_view builtin_text();

  static AuCatalog parse(std::string_view json_text);
  static AuCatalog load(const std::string& path);

  explicit AuCatalog(std::vector<AuCatalogEntry> entries);

  const std::vector<AuCatalogEntry>& entries() const noexcept { return entries_; }
  int version() const noexcept { return version_; }

  const AuCatalogEntry* find(int au_id) const noexcept;
  const AuCatalogEntry& at(int au_id) const;  // throws CatalogMiss
  bool contains(int au_id) const noexcept { return find(au_id) != nullptr; }

  // Neutral maps to the empty set.
  std::set<int> aus_for_emotion(EmotionLabel e) const;

  // Rank activations for overlay. With a hint, candidates are restricted to
  // the hint's AU set; candidates >= tau are sorted by score (ties: lower
  // au_id first) and truncated to k. When nothing qualifies the top-k of all
  // catalog AUs is returned instead. Ids absent from the catalog are ignored.
  RankedAUs rank_aus(const std::map<int, double>& scores, std::optional<EmotionLabel> hint,
                     double tau = kDefaultActivationThreshold, int k = kDefaultTopK) const;

  // Centroid of the AU's landmark points.
  Point au_anchor(int au_id, std::span<const Point> landmarks) const;

  std::string to_json() const;

 private:
  std::vector<AuCatalogEntry> entries_;  // sorted by au_id
  int version_ = 1;
};

}  // namespace sovtp
