#include "samrf/hypercube.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "samrf/error.hpp"
#include "samrf/rng.hpp"

namespace samrf {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

int parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(trim(text), &pos);
    if (pos != trim(text).size()) throw Error(what + ": trailing characters in '" + text + "'");
    return static_cast<int>(v);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(what + ": cannot parse integer from '" + text + "'");
  }
}

std::vector<std::uint8_t> read_binary(const std::filesystem::path& path,
                                      const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(what + ": cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

float float_from_le(const std::uint8_t* b) {
  const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                          (static_cast<std::uint32_t>(b[1]) << 8) |
                          (static_cast<std::uint32_t>(b[2]) << 16) |
                          (static_cast<std::uint32_t>(b[3]) << 24);
  float f;
  std::memcpy(&f, &u, sizeof f);
  return f;
}

void float_to_le(float f, std::uint8_t* b) {
  std::uint32_t u;
  std::memcpy(&u, &f, sizeof u);
  b[0] = static_cast<std::uint8_t>(u & 0xff);
  b[1] = static_cast<std::uint8_t>((u >> 8) & 0xff);
  b[2] = static_cast<std::uint8_t>((u >> 16) & 0xff);
  b[3] = static_cast<std::uint8_t>((u >> 24) & 0xff);
}

}  // namespace

SpectralCube SpectralCube::create(int width, int height, int bands, std::vector<double> values) {
  if (width < 1 || height < 1 || bands < 1)
    throw Error("SpectralCube: width, height and bands must all be >= 1");
  const std::size_t expected =
      static_cast<std::size_t>(width) * height * static_cast<std::size_t>(bands);
  if (values.size() != expected)
    throw Error("SpectralCube: got " + std::to_string(values.size()) + " values, expected " +
                std::to_string(expected));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      const int pixel = static_cast<int>(i / bands);
      throw Error("SpectralCube: non-finite value at pixel (x=" +
                  std::to_string(pixel % width) + ", y=" + std::to_string(pixel / width) +
                  "), band " + std::to_string(i % bands));
    }
  }
  SpectralCube cube;
  cube.width = width;
  cube.height = height;
  cube.bands = bands;
  cube.values = std::move(values);
  return cube;
}

LabelMap LabelMap::create(int width, int height, std::vector<int> labels) {
  if (width < 1 || height < 1) throw Error("LabelMap: width and height must be >= 1");
  if (labels.size() != static_cast<std::size_t>(width) * height)
    throw Error("LabelMap: label count does not match dimensions");
  int max_label = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0)
      throw Error("LabelMap: negative label at pixel (x=" + std::to_string(i % width) +
                  ", y=" + std::to_string(i / width) + ")");
    max_label = std::max(max_label, labels[i]);
  }
  LabelMap map;
  map.width = width;
  map.height = height;
  map.class_count = max_label;
  map.labels = std::move(labels);
  return map;
}

SpectralCube load_cube(const std::filesystem::path& header_path) {
  std::ifstream in(header_path);
  if (!in) throw Error("load_cube: cannot open header '" + header_path.string() + "'");

  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto colon = t.find(':');
    if (colon == std::string::npos)
      throw Error("load_cube: malformed header line '" + t + "'");
    kv[trim(t.substr(0, colon))] = trim(t.substr(colon + 1));
  }
  for (const char* key : {"width", "height", "bands", "data", "byteorder", "dtype", "layout"}) {
    if (!kv.count(key)) throw Error("load_cube: header missing key '" + std::string(key) + "'");
  }
  if (kv["byteorder"] != "little")
    throw Error("load_cube: unsupported byteorder '" + kv["byteorder"] + "' (must be little)");
  if (kv["dtype"] != "float32")
    throw Error("load_cube: unsupported dtype '" + kv["dtype"] + "' (must be float32)");
  if (kv["layout"] != "bsq")
    throw Error("load_cube: unsupported layout '" + kv["layout"] + "' (must be bsq)");

  const int width = parse_int(kv["width"], "load_cube: width");
  const int height = parse_int(kv["height"], "load_cube: height");
  const int bands = parse_int(kv["bands"], "load_cube: bands");
  if (width < 1 || height < 1 || bands < 1)
    throw Error("load_cube: width, height and bands must all be >= 1");

  const std::filesystem::path payload_path = header_path.parent_path() / kv["data"];
  const std::vector<std::uint8_t> bytes = read_binary(payload_path, "load_cube");
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  const std::size_t count = plane * bands;
  if (bytes.size() != count * 4)
    throw Error("load_cube: payload '" + payload_path.string() + "' holds " +
                std::to_string(bytes.size()) + " bytes, expected " + std::to_string(count * 4) +
                " (" + std::to_string(count) + " float32 values)");

  // BSQ payload -> pixel-interleaved storage.
  std::vector<double> values(count);
  for (int b = 0; b < bands; ++b) {
    const std::uint8_t* src = bytes.data() + static_cast<std::size_t>(b) * plane * 4;
    for (std::size_t p = 0; p < plane; ++p) {
      const float f = float_from_le(src + p * 4);
      if (!std::isfinite(f))
        throw Error("load_cube: non-finite value at pixel (x=" +
                    std::to_string(p % static_cast<std::size_t>(width)) + ", y=" +
                    std::to_string(p / static_cast<std::size_t>(width)) + "), band " +
                    std::to_string(b));
      values[p * bands + b] = static_cast<double>(f);
    }
  }
  return SpectralCube::create(width, height, bands, std::move(values));
}

void write_cube(const SpectralCube& cube, const std::filesystem::path& header_path,
                const std::string& payload_name) {
  const std::filesystem::path payload_path = header_path.parent_path() / payload_name;
  std::ofstream header(header_path);
  if (!header) throw Error("write_cube: cannot open '" + header_path.string() + "'");
  header << "width: " << cube.width << "\n"
         << "height: " << cube.height << "\n"
         << "bands: " << cube.bands << "\n"
         << "data: " << payload_name << "\n"
         << "byteorder: little\n"
         << "dtype: float32\n"
         << "layout: bsq\n";
  if (!header) throw Error("write_cube: failed writing header");

  const std::size_t plane = static_cast<std::size_t>(cube.width) * cube.height;
  std::vector<std::uint8_t> bytes(plane * cube.bands * 4);
  for (int b = 0; b < cube.bands; ++b) {
    std::uint8_t* dst = bytes.data() + static_cast<std::size_t>(b) * plane * 4;
    for (std::size_t p = 0; p < plane; ++p) {
      float_to_le(static_cast<float>(cube.values[p * cube.bands + b]), dst + p * 4);
    }
  }
  std::ofstream payload(payload_path, std::ios::binary);
  if (!payload) throw Error("write_cube: cannot open '" + payload_path.string() + "'");
  payload.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
  if (!payload) throw Error("write_cube: failed writing payload");
}

LabelMap load_labels(const std::filesystem::path& path, int expected_width, int expected_height) {
  std::ifstream in(path);
  if (!in) throw Error("load_labels: cannot open '" + path.string() + "'");

  std::vector<int> labels;
  std::string line;
  int width = -1;
  int rows = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::stringstream row(line);
    std::string cell;
    int cols = 0;
    while (std::getline(row, cell, ',')) {
      const int v = parse_int(cell, "load_labels: row " + std::to_string(rows));
      if (v < 0)
        throw Error("load_labels: negative label " + std::to_string(v) + " at row " +
                    std::to_string(rows) + ", column " + std::to_string(cols));
      labels.push_back(v);
      ++cols;
    }
    if (width < 0) {
      width = cols;
    } else if (cols != width) {
      throw Error("load_labels: row " + std::to_string(rows) + " has " + std::to_string(cols) +
                  " columns, expected " + std::to_string(width));
    }
    ++rows;
  }
  if (rows == 0 || width <= 0) throw Error("load_labels: '" + path.string() + "' is empty");
  if (expected_width > 0 && width != expected_width)
    throw Error("load_labels: file is " + std::to_string(width) + " columns wide, expected " +
                std::to_string(expected_width));
  if (expected_height > 0 && rows != expected_height)
    throw Error("load_labels: file has " + std::to_string(rows) + " rows, expected " +
                std::to_string(expected_height));
  return LabelMap::create(width, rows, std::move(labels));
}

void write_labels(const std::vector<int>& labels, int width, int height,
                  const std::filesystem::path& path) {
  if (labels.size() != static_cast<std::size_t>(width) * height)
    throw Error("write_labels: label count does not match dimensions");
  std::ofstream out(path);
  if (!out) throw Error("write_labels: cannot open '" + path.string() + "'");
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (x) out << ',';
      out << labels[static_cast<std::size_t>(y) * width + x];
    }
    out << '\n';
  }
  if (!out) throw Error("write_labels: failed writing '" + path.string() + "'");
}

void write_labels(const LabelMap& labels, const std::filesystem::path& path) {
  write_labels(labels.labels, labels.width, labels.height, path);
}

SpectralCube normalize_bands(const SpectralCube& cube) {
  const std::size_t n = static_cast<std::size_t>(cube.pixel_count());
  std::vector<double> out(cube.values.size());
  for (int b = 0; b < cube.bands; ++b) {
    double lo = cube.values[b];
    double hi = cube.values[b];
    double sum = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double v = cube.values[p * cube.bands + b];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    if (lo == hi) {
      // constant band
      for (std::size_t p = 0; p < n; ++p) out[p * cube.bands + b] = 0.0;
      continue;
    }
    const double mean = sum / static_cast<double>(n);
    double ssq = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double d = cube.values[p * cube.bands + b] - mean;
      ssq += d * d;
    }
    const double std_dev = std::sqrt(ssq / static_cast<double>(n));  // population
    for (std::size_t p = 0; p < n; ++p) {
      out[p * cube.bands + b] = (cube.values[p * cube.bands + b] - mean) / std_dev;
    }
  }
  return SpectralCube::create(cube.width, cube.height, cube.bands, std::move(out));
}

std::vector<int> Split::all_unary_train() const {
  std::vector<int> out;
  for (const auto& v : unary_train) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::vector<int> Split::all_beta_validation() const {
  std::vector<int> out;
  for (const auto& v : beta_validation) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::vector<int> Split::all_training() const {
  std::vector<int> out;
  for (int c = 0; c < class_count; ++c) {
    out.insert(out.end(), unary_train[c].begin(), unary_train[c].end());
    out.insert(out.end(), beta_validation[c].begin(), beta_validation[c].end());
  }
  return out;
}

std::vector<int> Split::all_test() const {
  std::vector<int> out;
  for (const auto& v : test) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::uint64_t Split::digest() const {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(class_count));
  for (const auto* sets : {&unary_train, &beta_validation, &test}) {
    for (const auto& v : *sets) {
      mix(v.size());
      for (int idx : v) mix(static_cast<std::uint64_t>(idx));
    }
  }
  return h;
}

Split make_split(const LabelMap& labels, const SplitSpec& spec) {
  if (spec.train_per_class < 2) throw Error("make_split: trainPerClass must be >= 2");
  if (spec.test_per_class < 1) throw Error("make_split: testPerClass must be >= 1");
  if (!(spec.unary_fraction > 0.0 && spec.unary_fraction < 1.0))
    throw Error("make_split: unaryFraction must lie in (0, 1)");
  if (labels.class_count < 1) throw Error("make_split: label map has no labeled pixels");

  std::vector<std::vector<int>> members(labels.class_count);
  for (int p = 0; p < labels.pixel_count(); ++p) {
    const int c = labels.labels[p];
    if (c > 0) members[c - 1].push_back(p);
  }
  // Pixel scan above is row-major, so each list is already sorted ascending;
  // sort anyway to keep the contract independent of how members were found.
  for (auto& v : members) std::sort(v.begin(), v.end());

  Split split;
  split.class_count = labels.class_count;
  split.unary_train.resize(labels.class_count);
  split.beta_validation.resize(labels.class_count);
  split.test.resize(labels.class_count);

  const int needed = spec.train_per_class + spec.test_per_class;
  Rng rng(spec.seed);
  for (int c = 0; c < labels.class_count; ++c) {
    auto& pool = members[c];
    if (static_cast<int>(pool.size()) < needed)
      throw Error("make_split: class " + std::to_string(c + 1) + " has " +
                  std::to_string(pool.size()) + " labeled pixels, needs >= " +
                  std::to_string(needed));
    rng.shuffle(pool);
    const int cut =
        static_cast<int>(std::floor(spec.unary_fraction * spec.train_per_class + 0.5));
    auto it = pool.begin();
    split.test[c].assign(it, it + spec.test_per_class);
    it += spec.test_per_class;
    split.unary_train[c].assign(it, it + cut);
    split.beta_validation[c].assign(it + cut, it + spec.train_per_class);
    std::sort(split.test[c].begin(), split.test[c].end());
    std::sort(split.unary_train[c].begin(), split.unary_train[c].end());
    std::sort(split.beta_validation[c].begin(), split.beta_validation[c].end());
  }
  return split;
}

ClassFilterResult filter_classes(const LabelMap& labels, int min_pixels) {
  if (min_pixels < 1) throw Error("filter_classes: threshold must be >= 1");
  std::vector<int> counts(labels.class_count, 0);
  for (int v : labels.labels) {
    if (v > 0) ++counts[v - 1];
  }
  std::vector<int> remap(labels.class_count + 1, 0);
  ClassFilterResult result;
  result.original_counts = counts;
  for (int c = 1; c <= labels.class_count; ++c) {
    if (counts[c - 1] >= min_pixels) {
      result.kept_original.push_back(c);
      remap[c] = static_cast<int>(result.kept_original.size());
    }
  }
  if (result.kept_original.empty())
    throw Error("filter_classes: no class has >= " + std::to_string(min_pixels) + " pixels");
  std::vector<int> out(labels.labels.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = remap[labels.labels[i]];
  result.labels = LabelMap::create(labels.width, labels.height, std::move(out));
  return result;
}

}  // namespace samrf
