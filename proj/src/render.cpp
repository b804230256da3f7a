#include "samrf/render.hpp"

#include <fstream>

#include "samrf/error.hpp"

namespace samrf {

Palette Palette::standard16() {
  Palette p;
  p.colors = {
      Rgb{230, 25, 75},    // red
      Rgb{60, 180, 75},    // green
      Rgb{255, 225, 25},   // yellow
      Rgb{0, 130, 200},    // blue
      Rgb{245, 130, 48},   // orange
      Rgb{145, 30, 180},   // purple
      Rgb{70, 240, 240},   // cyan
      Rgb{240, 50, 230},   // magenta
      Rgb{210, 245, 60},   // lime
      Rgb{250, 190, 212},  // pink
      Rgb{0, 128, 128},    // teal
      Rgb{220, 190, 255},  // lavender
      Rgb{170, 110, 40},   // brown
      Rgb{255, 250, 200},  // beige
      Rgb{128, 0, 0},      // maroon
      Rgb{170, 255, 195},  // mint
  };
  return p;
}

const Rgb& Palette::color_for(int label) const {
  if (label == 0) return background;
  if (label < 0 || label > static_cast<int>(colors.size()))
    throw Error("palette has no color for label " + std::to_string(label));
  return colors[static_cast<std::size_t>(label - 1)];
}

std::string render_ppm(const std::vector<int>& labels, int width, int height,
                       const Palette& palette) {
  if (width < 1 || height < 1) throw Error("render_ppm: dimensions must be >= 1");
  if (labels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("render_ppm: label count does not match the dimensions");
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + labels.size() * 3);
  for (int label : labels) {
    const Rgb& rgb = palette.color_for(label);
    out.push_back(static_cast<char>(rgb[0]));
    out.push_back(static_cast<char>(rgb[1]));
    out.push_back(static_cast<char>(rgb[2]));
  }
  return out;
}

void write_ppm(const std::vector<int>& labels, int width, int height, const Palette& palette,
               const std::filesystem::path& path) {
  const std::string payload = render_ppm(labels, width, height, palette);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace samrf
