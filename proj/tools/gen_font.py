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

"""Regenerates the glyph table in core/src/font.cpp from PIL's legacy bitmap font."""
from PIL import ImageFont


def main() -> None:
    font = ImageFont.load_default_imagefont()
    for code in range(0x20, 0x7F):
        mask = font.getmask(chr(code))
        assert mask.size == (6, 11), (chr(code), mask.size)
        rows = []
        for y in range(11):
            bits = 0
            for x in range(6):
                if mask.getpixel((x, y)):
                    bits |= 1 << (5 - x)
            rows.append(f"0x{bits:02x}")
        label = "backslash" if chr(code) == "\\" else repr(chr(code))
        print(f"    Glyph{{{', '.join(rows)}}},  // {label}")


if __name__ == "__main__":
    main()
