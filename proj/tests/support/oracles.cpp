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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sovtp::oracle {

IntBox to_int(const BoundingBox& b) {
  IntBox r{static_cast<int>(b.x_min()), static_cast<int>(b.y_min()), static_cast<int>(b.x_max()),
           static_cast<int>(b.y_max())};
  if (r.x0 != b.x_min() || r.y0 != b.y_min() || r.x1 != b.x_max() || r.y1 != b.y_max()) {
    throw std::invalid_argument("oracle needs integer corners");
  }
  return r;
}

long long cell_count(const IntBox& b) {
  long long n = 0;
  for (int y = b.y0; y < b.y1; ++y) {
    for (int x = b.x0; x < b.x1; ++x) ++n;
  }
  return n;
}

long long shared_cells(const IntBox& a, const IntBox& b) {
  long long n = 0;
  for (int y = a.y0; y < a.y1; ++y) {
    for (int x = a.x0; x < a.x1; ++x) {
      if (x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1) ++n;
    }
  }
  return n;
}

std::vector<std::size_t> kept_by_subsets(const std::vector<IntBox>& boxes, double epsilon) {
  const std::size_t n = boxes.size();
  if (n > 16) throw std::invalid_argument("too many boxes for subset enumeration");
  std::vector<long long> areas(n);
  for (std::size_t i = 0; i < n; ++i) areas[i] = cell_count(boxes[i]);

  // priority[r] = input index of the r-th box in sorted order.
  std::vector<std::size_t> priority(n);
  std::iota(priority.begin(), priority.end(), std::size_t{0});
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = i; j > 0 && areas[priority[j]] > areas[priority[j - 1]]; --j) {
      std::swap(priority[j], priority[j - 1]);
    }
  }

  std::vector<std::vector<bool>> compatible(n, std::vector<bool>(n, true));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const long long inter = shared_cells(boxes[i], boxes[j]);
      const long long smaller = std::min(areas[i], areas[j]);
      const double ratio = inter == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(smaller);
      compatible[i][j] = ratio <= epsilon;
    }
  }

  // Subset masks over sorted ranks; rank 0 is the most significant bit, so
  // the numerically largest compatible mask is the priority winner.
  unsigned long best = 0;
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    bool ok = true;
    for (std::size_t r = 0; r < n && ok; ++r) {
      if (!(mask >> (n - 1 - r) & 1UL)) continue;
      for (std::size_t s = r + 1; s < n && ok; ++s) {
        if (!(mask >> (n - 1 - s) & 1UL)) continue;
        ok = compatible[priority[r]][priority[s]];
      }
    }
    if (ok) best = std::max(best, mask);
  }
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < n; ++r) {
    if (best >> (n - 1 - r) & 1UL) kept.push_back(priority[r]);
  }
  return kept;
}

Scores score_records(const std::vector<EvalRecord>& records) {
  // table[p][t]; p == 7 is "no answer".
  long long table[8][7] = {};
  for (const auto& r : records) {
    const int t = static_cast<int>(r.ground_truth);
    const int p = r.prediction ? static_cast<int>(*r.prediction) : 7;
    table[p][t] += 1;
  }
  Scores s;
  long long diag = 0;
  for (int c = 0; c < 7; ++c) diag += table[c][c];
  s.accuracy = 100.0 * static_cast<double>(diag) / static_cast<double>(records.size());

  double f1_sum = 0.0;
  long long tp_all = 0, fp_all = 0, fn_all = 0;
  for (int c = 0; c < 7; ++c) {
    long long tp = table[c][c], fp = 0, fn = 0;
    for (int t = 0; t < 7; ++t) {
      if (t != c) fp += table[c][t];
    }
    for (int p = 0; p < 8; ++p) {
      if (p != c) fn += table[p][c];
    }
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
    if (2 * tp + fp + fn > 0) f1_sum += 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
  }
  s.macro_f1 = 100.0 * f1_sum / 7.0;
  s.micro_f1 = 2 * tp_all + fp_all + fn_all == 0
                   ? 0.0
                   : 100.0 * 2.0 * tp_all / static_cast<double>(2 * tp_all + fp_all + fn_all);
  return s;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::max(0.0, std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min()));
  const double h = std::max(0.0, std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min()));
  const double inter = w * h;
  if (inter == 0.0) return 0.0;
  return inter / (a.width() * a.height() + b.width() * b.height() - inter);
}

std::vector<std::vector<int>> greedy_track_ids(const std::vector<std::vector<BoundingBox>>& frames,
                                               double threshold) {
  std::vector<std::vector<int>> ids;
  int next_id = 1;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& cur = frames[f];
    std::vector<int> assigned(cur.size(), 0);
    if (f > 0) {
      const auto& prev = frames[f - 1];
      const auto& prev_ids = ids[f - 1];
      std::vector<bool> prev_taken(prev.size(), false);
      for (;;) {
        int bp = -1, bc = -1;
        double best = -1.0;
        for (std::size_t p = 0; p < prev.size(); ++p) {
          if (prev_taken[p]) continue;
          for (std::size_t c = 0; c < cur.size(); ++c) {
            if (assigned[c] != 0) continue;
            const double s = oracle::iou(prev[p], cur[c]);
            if (s <= 0.0 || s < threshold) continue;
            const bool better = s > best || (s == best && (prev_ids[p] < prev_ids[bp] ||
                                                           (prev_ids[p] == prev_ids[bp] && static_cast<int>(c) < bc)));
            if (better) {
              best = s;
              bp = static_cast<int>(p);
              bc = static_cast<int>(c);
            }
          }
        }
        if (bp < 0) break;
        prev_taken[bp] = true;
        assigned[bc] = prev_ids[bp];
      }
    }
    for (auto& a : assigned) {
      if (a == 0) a = next_id++;
    }
    ids.push_back(assigned);
  }
  return ids;
}

namespace {

void mark(std::vector<bool>& grid, int width, int height, int x0, int y0, int x1, int y1) {
  for (int y = std::max(0, y0); y <= std::min(height - 1, y1); ++y) {
    for (int x = std::max(0, x0); x <= std::min(width - 1, x1); ++x) grid[static_cast<std::size_t>(y * width + x)] = true;
  }
}

struct Block {
  int x, y, w, h;
};

Block text_block(const std::string& text, const Style& s) {
  return {0, 0, static_cast<int>(text.size()) * 6 * s.font_scale + 2 * s.text_padding, 11 * s.font_scale + 2 * s.text_padding};
}

Block clamp_block(Block b, int width, int height) {
  b.x = std::max(0, std::min(b.x, width - b.w));
  b.y = std::max(0, std::min(b.y, height - b.h));
  return b;
}

}  // namespace

std::vector<bool> outline_pixels(const BoundingBox& box, int thickness, int width, int height) {
  std::vector<bool> grid(static_cast<std::size_t>(width * height), false);
  const int x0 = static_cast<int>(std::floor(box.x_min())), y0 = static_cast<int>(std::floor(box.y_min()));
  const int x1 = std::max(x0, static_cast<int>(std::ceil(box.x_max())) - 1);
  const int y1 = std::max(y0, static_cast<int>(std::ceil(box.y_max())) - 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const int edge = std::min({x - x0, x1 - x, y - y0, y1 - y});
      if (edge < thickness && x >= 0 && y >= 0 && x < width && y < height) {
        grid[static_cast<std::size_t>(y * width + x)] = true;
      }
    }
  }
  return grid;
}

std::vector<bool> allowed_pixels(const RenderPlan& plan) {
  const int W = plan.width, H = plan.height;
  const Style& s = plan.style;
  std::vector<bool> grid(static_cast<std::size_t>(W * H), false);
  for (const auto& o : plan.overlays) {
    if (o.mask) {
      for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
          if (!(o.mask->at(x, y) == Rgb{})) grid[static_cast<std::size_t>(y * W + x)] = true;
        }
      }
    }
    if (o.draw_box) {
      const auto band = outline_pixels(o.box, std::max(1, s.box_thickness), W, H);
      for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = grid[i] || band[i];
    }
    for (const auto& p : o.landmarks) {
      const int x = static_cast<int>(std::lround(p.x)), y = static_cast<int>(std::lround(p.y));
      mark(grid, W, H, x - s.landmark_radius, y - s.landmark_radius, x + s.landmark_radius, y + s.landmark_radius);
    }
    for (const auto& t : o.au_tags) {
      Block b = text_block(t.text, s);
      const int ax = static_cast<int>(std::lround(t.anchor.x)), ay = static_cast<int>(std::lround(t.anchor.y));
      if (t.placement == TagPlacement::kCentered) {
        b.x = ax - b.w / 2;
        b.y = ay - b.h / 2;
      } else {
        b.x = ax;
        b.y = ay;
      }
      b = clamp_block(b, W, H);
      mark(grid, W, H, b.x, b.y, b.x + b.w - 1, b.y + b.h - 1);
    }
    if (o.draw_number) {
      Block b = text_block(std::to_string(o.face_id), s);
      b.x = static_cast<int>(std::floor(o.box.x_min()));
      const int top = static_cast<int>(std::floor(o.box.y_min()));
      b.y = top - b.h >= 0 ? top - b.h : top;
      b = clamp_block(b, W, H);
      mark(grid, W, H, b.x, b.y, b.x + b.w - 1, b.y + b.h - 1);
    }
  }
  return grid;
}

}  // namespace sovtp::oracle
