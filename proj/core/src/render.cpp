// Copyright 2026 The sybilscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>

#include <fmt/format.h>

#include "sybilscope/uptime.hpp"

namespace sybilscope {

std::array<std::uint8_t, 3> Image::pixel(std::size_t x, std::size_t y) const {
  const std::size_t i = (y * width + x) * 3;
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

std::string Image::to_ppm() const {
  std::string out = fmt::format("P6\n{} {}\n255\n", width, height);
  out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
  return out;
}

std::vector<Image> render(const UptimeMatrix& matrix, const ColumnOrder& order,
                          std::size_t max_width) {
  const std::size_t cols = order.permutation.size();
  max_width = std::max<std::size_t>(max_width, 1);
  std::vector<bool> red(cols, false);
  for (const ColumnRun& run : order.identical_runs) {
    for (std::size_t k = run.begin; k < run.end; ++k) red[k] = true;
  }

  std::vector<Image> images;
  for (std::size_t first = 0; first < cols; first += max_width) {
    const std::size_t last = std::min(cols, first + max_width);
    Image img;
    img.width = last - first;
    img.height = matrix.rows();
    img.rgb.assign(img.width * img.height * 3, 255);
    for (std::size_t k = first; k < last; ++k) {
      const std::size_t col = order.permutation[k];
      const std::size_t x = k - first;
      for (std::size_t y = 0; y < img.height; ++y) {
        if (!matrix.at(y, col)) continue;
        std::uint8_t* px = &img.rgb[(y * img.width + x) * 3];
        px[0] = red[k] ? 255 : 0;
        px[1] = 0;
        px[2] = 0;
      }
    }
    images.push_back(std::move(img));
  }
  return images;
}

}  // namespace sybilscope
