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

#include "sovtp/sidecar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sovtp {

using nlohmann::json;

std::string SidecarViolation::to_string() const {
  std::string out = location;
  if (!field.empty()) out += (out.empty() ? "" : ".") + field;
  return out + ": " + message;
}

namespace {

std::string summarize(const std::vector<SidecarViolation>& violations) {
  std::string msg = "sidecar schema error";
  if (violations.empty()) return msg;
  msg += ": " + violations.front().to_string();
  if (violations.size() > 1) {
    msg += " (and " + std::to_string(violations.size() - 1) + " more)";
  }
  return msg;
}

class Parser {
 public:
  std::vector<SidecarViolation> violations;
  SidecarDocument doc;

  void run(std::string_view text) {
    json root;
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      fail("", "", std::string("malformed JSON: ") + e.what());
      return;
    }
    if (!root.is_object()) {
      fail("", "", "document must be a JSON object");
      return;
    }
    if (root.value("schema", "") != kSidecarSchemaTag) {
      fail("", "schema", "expected \"" + std::string(kSidecarSchemaTag) + "\"");
    }
    doc.schema_version = string_field(root, "", "schema_version");
    if (!doc.schema_version.empty() && doc.schema_version != kSidecarSchemaVersion) {
      fail("", "schema_version", "unsupported version '" + doc.schema_version + "'");
    }
    doc.video_id = string_field(root, "", "video_id");
    if (doc.video_id.empty()) fail("", "video_id", "must be a non-empty string");
    doc.frame_width = positive_int(root, "", "frame_width");
    doc.frame_height = positive_int(root, "", "frame_height");
    if (root.contains("detector")) doc.detector_json = root["detector"].dump();

    if (!root.contains("frames") || !root["frames"].is_array()) {
      fail("", "frames", "must be an array");
      return;
    }
    std::set<int> seen;
    const auto& frames = root["frames"];
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const std::string loc = "frames[" + std::to_string(i) + "]";
      const auto& f = frames[i];
      if (!f.is_object()) {
        fail(loc, "", "must be an object");
        continue;
      }
      SidecarFrame frame;
      if (!f.contains("frame_index") || !f["frame_index"].is_number_integer() ||
          f["frame_index"].get<long long>() < 0) {
        fail(loc, "frame_index", "must be a non-negative integer");
        continue;
      }
      frame.frame_index = f["frame_index"].get<int>();
      if (!seen.insert(frame.frame_index).second) {
        fail(loc, "frame_index", "duplicate frame index " + std::to_string(frame.frame_index));
      }
      frame.image = f.contains("image") ? string_field(f, loc, "image")
                                        : default_frame_name(frame.frame_index);
      if (f.contains("detections")) {
        if (!f["detections"].is_array()) {
          fail(loc, "detections", "must be an array");
        } else {
          for (std::size_t d = 0; d < f["detections"].size(); ++d) {
            const std::string dloc = loc + ".detections[" + std::to_string(d) + "]";
            if (auto obs = detection(f["detections"][d], dloc, frame.frame_index)) {
              frame.detections.push_back(std::move(*obs));
            }
          }
        }
      }
      doc.frames.push_back(std::move(frame));
    }
    // Frame indices must cover 0..n-1 exactly once.
    int expected = 0;
    for (int idx : seen) {
      if (idx != expected) {
        fail("frames", "frame_index", "frame " + std::to_string(expected) + " is missing");
        break;
      }
      ++expected;
    }
    std::sort(doc.frames.begin(), doc.frames.end(),
              [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });
  }

 private:
  void fail(std::string loc, std::string field, std::string msg) {
    violations.push_back({std::move(loc), std::move(field), std::move(msg)});
  }

  std::string string_field(const json& obj, const std::string& loc, const char* key) {
    if (!obj.contains(key) || !obj[key].is_string()) {
      fail(loc, key, "must be a string");
      return {};
    }
    return obj[key].get<std::string>();
  }

  int positive_int(const json& obj, const std::string& loc, const char* key) {
    if (!obj.contains(key) || !obj[key].is_number_integer() || obj[key].get<long long>() <= 0) {
      fail(loc, key, "must be a positive integer");
      return 0;
    }
    return obj[key].get<int>();
  }

  bool in_frame(double x, double y) const {
    if (doc.frame_width <= 0 || doc.frame_height <= 0) return true;
    return x >= 0.0 && y >= 0.0 && x <= doc.frame_width && y <= doc.frame_height;
  }

  std::optional<FaceObservation> detection(const json& d, const std::string& loc, int frame_index) {
    if (!d.is_object()) {
      fail(loc, "", "must be an object");
      return std::nullopt;
    }
    const std::size_t before = violations.size();
    FaceObservation obs;
    obs.frame_index = frame_index;

    const auto& box = d.contains("box") ? d["box"] : json();
    if (!box.is_array() || box.size() != 4 ||
        !std::all_of(box.begin(), box.end(), [](const json& v) { return v.is_number(); })) {
      fail(loc, "box", "must be [x_min, y_min, x_max, y_max]");
    } else {
      const double x0 = box[0].get<double>(), y0 = box[1].get<double>();
      const double x1 = box[2].get<double>(), y1 = box[3].get<double>();
      if (!(x0 >= 0 && y0 >= 0 && x0 < x1 && y0 < y1)) {
        fail(loc, "box", "degenerate or negative box");
      } else if (!in_frame(x1, y1)) {
        fail(loc, "box", "extends outside the frame");
      } else {
        obs.box = BoundingBox::make(x0, y0, x1, y1);
      }
    }

    if (!d.contains("confidence") || !d["confidence"].is_number()) {
      fail(loc, "confidence", "must be a number");
    } else {
      obs.confidence = d["confidence"].get<double>();
      if (!(obs.confidence >= 0.0 && obs.confidence <= 1.0)) {
        fail(loc, "confidence", "must lie in [0, 1]");
      }
    }

    if (d.contains("landmarks") && !d["landmarks"].is_null()) {
      const auto& lm = d["landmarks"];
      if (!lm.is_array() || lm.size() != kLandmarkCount) {
        fail(loc, "landmarks",
             "must hold exactly 68 points, got " + std::to_string(lm.is_array() ? lm.size() : 0));
      } else {
        for (std::size_t i = 0; i < lm.size(); ++i) {
          const auto& p = lm[i];
          if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            fail(loc, "landmarks[" + std::to_string(i) + "]", "must be [x, y]");
            continue;
          }
          const Point pt{p[0].get<double>(), p[1].get<double>()};
          if (!in_frame(pt.x, pt.y)) {
            fail(loc, "landmarks[" + std::to_string(i) + "]", "outside the frame");
          }
          obs.landmarks.push_back(pt);
        }
      }
    }

    if (d.contains("au_scores")) {
      const auto& aus = d["au_scores"];
      if (!aus.is_object()) {
        fail(loc, "au_scores", "must be an object keyed by AU id");
      } else {
        for (const auto& [key, value] : aus.items()) {
          int id = 0;
          std::size_t used = 0;
          try {
            id = std::stoi(key, &used);
          } catch (const std::exception&) {
            used = 0;
          }
          if (used != key.size() || id <= 0) {
            fail(loc, "au_scores." + key, "key must be a positive integer AU id");
            continue;
          }
          if (!value.is_number() || !(value.get<double>() >= 0.0 && value.get<double>() <= 1.0)) {
            fail(loc, "au_scores." + key, "score must be a number in [0, 1]");
            continue;
          }
          obs.au_scores[id] = value.get<double>();
        }
      }
    }

    if (d.contains("dominant_emotion") && !d["dominant_emotion"].is_null()) {
      const auto& e = d["dominant_emotion"];
      auto label = e.is_string() ? parse_label(e.get<std::string>()) : std::nullopt;
      if (!label) {
        fail(loc, "dominant_emotion", "must be one of the seven emotion labels");
      } else {
        obs.dominant_emotion_hint = label;
      }
    }

    if (d.contains("body_mask") && !d["body_mask"].is_null()) {
      obs.body_mask = string_field(d, loc, "body_mask");
    }

    if (violations.size() != before) return std::nullopt;
    return obs;
  }
};

}  // namespace

SidecarError::SidecarError(std::vector<SidecarViolation> violations)
    : DataError(summarize(violations)), violations_(std::move(violations)) {}

std::vector<SidecarViolation> validate_sidecar(std::string_view json_text) {
  Parser p;
  p.run(json_text);
  return p.violations;
}

SidecarDocument parse_sidecar(std::string_view json_text) {
  Parser p;
  p.run(json_text);
  if (!p.violations.empty()) throw SidecarError(std::move(p.violations));
  return std::move(p.doc);
}

SidecarDocument load_sidecar(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SidecarError({{path, "", "cannot open sidecar file"}});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sidecar(buf.str());
}

std::string default_frame_name(int frame_index) {
  char name[32];
  std::snprintf(name, sizeof(name), "frame_%06d.png", frame_index);
  return name;
}

}  // namespace sovtp
