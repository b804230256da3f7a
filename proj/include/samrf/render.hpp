#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace samrf {

using Rgb = std::array<std::uint8_t, 3>;

// Fixed 16-entry high-contrast palette indexed by class (1-based); label 0
// renders as the background color (black).
struct Palette {
  Rgb background{0, 0, 0};
  std::vector<Rgb> colors;

  static Palette standard16();

  const Rgb& color_for(int label) const;
};

// Binary P6 payload: "P6\n<width> <height>\n255\n" followed by 3*W*H bytes,
// row-major.
std::string render_ppm(const std::vector<int>& labels, int width, int height,
                       const Palette& palette);

void write_ppm(const std::vector<int>& labels, int width, int height, const Palette& palette,
               const std::filesystem::path& path);

}  // namespace samrf
