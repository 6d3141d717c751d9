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

#include <string>
#include <string_view>
#include <vector>

#include "sovtp/errors.hpp"
#include "sovtp/geometry.hpp"

namespace sovtp {

// Per-video detection document written by the detector adapter.
// JSON, schema tag "sovtp-sidecar", see schemas/sidecar.schema.json.
inline constexpr std::string_view kSidecarSchemaTag = "sovtp-sidecar";
inline constexpr std::string_view kSidecarSchemaVersion = "1.0";

struct SidecarFrame {
  int frame_index = 0;
  std::string image;  // file name inside the frame directory
  std::vector<FaceObservation> detections;
};

struct SidecarDocument {
  std::string schema_version;
  std::string video_id;
  int frame_width = 0;
  int frame_height = 0;
  std::vector<SidecarFrame> frames;  // ascending frame_index, 0..n-1
  std::string detector_json;         // provenance block, stored verbatim (compact)
};

struct SidecarViolation {
  std::string location;  // e.g. "frames[2].detections[0]"
  std::string field;     // e.g. "au_scores.12"
  std::string message;

  std::string to_string() const;
};

class SidecarError : public DataError {
 public:
  explicit SidecarError(std::vector<SidecarViolation> violations);
  const std::vector<SidecarViolation>& violations() const noexcept { return violations_; }

 private:
  std::vector<SidecarViolation> violations_;
};

// Every invariant violation in the document; empty when valid.
std::vector<SidecarViolation> validate_sidecar(std::string_view json_text);

// Throws SidecarError listing all violations.
SidecarDocument parse_sidecar(std::string_view json_text);
SidecarDocument load_sidecar(const std::string& path);

// frame_000042.png
std::string default_frame_name(int frame_index);

}  // namespace sovtp
