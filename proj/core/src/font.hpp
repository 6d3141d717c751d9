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
#include <cstdint>

namespace sovtp::font {

// Embedded 6x11 monospace bitmap font covering printable ASCII. Each glyph
// row is a 6-bit mask, bit 5 = leftmost column.
inline constexpr int kGlyphWidth = 6;
inline constexpr int kGlyphHeight = 11;

using Glyph = std::array<std::uint8_t, kGlyphHeight>;

// Characters outside 0x20-0x7e map to '?'.
const Glyph& glyph(char c) noexcept;

}  // namespace sovtp::font
