#!/usr/bin/env python3
# Copyright 2026 The SoVTP Toolkit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates tests/data/sidecar: valid sidecars plus one-defect mutants.

index.json lists every file with the expected verdict and whether JSON Schema
alone can detect the defect (the rest need the loader's cross-field checks).
"""
import copy
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "sidecar"


def landmarks(x0, y0, x1, y1):
    pts = []
    for i in range(68):
        u = 0.1 + 0.8 * ((i * 7) % 17) / 16.0
        v = 0.1 + 0.8 * (i % 11) / 10.0
        pts.append([round(x0 + u * (x1 - x0), 3), round(y0 + v * (y1 - y0), 3)])
    return pts


def base(frames=10, faces=2):
    doc = {
        "schema": "sovtp-sidecar",
        "schema_version": "1.0",
        "video_id": "synthetic",
        "frame_width": 64,
        "frame_height": 48,
        "detector": {"name": "synthetic", "threshold": 0.5},
        "frames": [],
    }
    for f in range(frames):
        dets = []
        for k in range(faces):
            box = [2 + 30 * k + f % 3, 4, 22 + 30 * k + f % 3, 30]
            dets.append({
                "box": box,
                "confidence": 0.9,
                "landmarks": landmarks(*box),
                "au_scores": {"6": 0.8, "12": 0.7, "25": 0.55},
                "dominant_emotion": "Happiness",
            })
        doc["frames"].append({"frame_index": f, "image": "frame_%06d.png" % f, "detections": dets})
    return doc


def mutate(fn):
    doc = base()
    fn(doc)
    return doc


def det(doc, f=0, k=0):
    return doc["frames"][f]["detections"][k]


VALID = {
    "ten_frames": base(),
    "empty_video": base(frames=0),
    "no_faces": base(frames=3, faces=0),
    "optional_fields_null": mutate(lambda d: det(d).update(
        {"landmarks": None, "dominant_emotion": None, "body_mask": None, "au_scores": {}})),
    "extra_au_ids": mutate(lambda d: det(d)["au_scores"].update({"43": 0.2, "45": 1.0})),
    "default_image_name": mutate(lambda d: d["frames"][1].pop("image")),
}

# name -> (mutation, detectable by JSON Schema alone)
INVALID = {
    "au_score_above_one": (lambda d: det(d)["au_scores"].update({"12": 1.5}), True),
    "landmarks_67": (lambda d: det(d)["landmarks"].pop(), True),
    "missing_frame": (lambda d: d["frames"].pop(4), False),
    "duplicate_frame_index": (lambda d: d["frames"][5].update({"frame_index": 4}), False),
    "box_outside_frame": (lambda d: det(d).update({"box": [40, 4, 70, 30]}), False),
    "degenerate_box": (lambda d: det(d).update({"box": [10, 4, 10, 30]}), False),
    "box_three_values": (lambda d: det(d).update({"box": [1, 2, 3]}), True),
    "negative_confidence": (lambda d: det(d).update({"confidence": -0.1}), True),
    "confidence_above_one": (lambda d: det(d).update({"confidence": 1.2}), True),
    "wrong_schema_tag": (lambda d: d.update({"schema": "other"}), True),
    "unsupported_version": (lambda d: d.update({"schema_version": "2.0"}), True),
    "empty_video_id": (lambda d: d.update({"video_id": ""}), True),
    "zero_width": (lambda d: d.update({"frame_width": 0}), True),
    "missing_frames": (lambda d: d.pop("frames"), True),
    "unknown_emotion": (lambda d: det(d).update({"dominant_emotion": "Joy"}), True),
    "non_numeric_au_key": (lambda d: det(d)["au_scores"].update({"AU12": 0.5}), True),
    "landmark_outside_frame": (lambda d: det(d)["landmarks"].__setitem__(3, [80.0, 10.0]), False),
    "landmark_three_coords": (lambda d: det(d)["landmarks"].__setitem__(3, [1.0, 2.0, 3.0]), True),
    "frames_not_array": (lambda d: d.update({"frames": {"0": {}}}), True),
    "negative_frame_index": (lambda d: d["frames"][0].update({"frame_index": -1}), True),
    "detections_not_array": (lambda d: d["frames"][0].update({"detections": {}}), True),
}


def main():
    for sub in ("valid", "invalid"):
        (ROOT / sub).mkdir(parents=True, exist_ok=True)
    index = {}
    for name, doc in VALID.items():
        (ROOT / "valid" / f"{name}.json").write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
        index[f"valid/{name}.json"] = {"valid": True, "schema_detects": True}
    for name, (fn, schema_detects) in INVALID.items():
        (ROOT / "invalid" / f"{name}.json").write_text(json.dumps(mutate(fn), sort_keys=True, indent=1) + "\n")
        index[f"invalid/{name}.json"] = {"valid": False, "schema_detects": schema_detects}
    (ROOT / "invalid" / "truncated.json").write_text(json.dumps(base(), sort_keys=True)[:500])
    index["invalid/truncated.json"] = {"valid": False, "schema_detects": True}
    (ROOT / "index.json").write_text(json.dumps(index, sort_keys=True, indent=1) + "\n")


if __name__ == "__main__":
    main()
