#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace samrf {

// A width x height grid of B-band spectra, stored pixel-interleaved (BIP):
// spectrum of pixel p = (x, y) occupies values[p*bands .. p*bands+bands-1]
// with p = y*width + x. Files store float32; in memory we keep doubles so
// that normalization statistics and angle sums do not lose precision.
struct SpectralCube {
  int width = 0;
  int height = 0;
  int bands = 0;
  std::vector<double> values;

  int pixel_count() const { return width * height; }

  std::span<const double> spectrum(int pixel) const {
    return {values.data() + static_cast<std::size_t>(pixel) * bands,
            static_cast<std::size_t>(bands)};
  }

  // Validates dimensions, value count and finiteness.
  static SpectralCube create(int width, int height, int bands, std::vector<double> values);
};

// Per-pixel integer class labels; 0 = unlabeled, 1..class_count = classes.
struct LabelMap {
  int width = 0;
  int height = 0;
  int class_count = 0;
  std::vector<int> labels;

  int pixel_count() const { return width * height; }

  static LabelMap create(int width, int height, std::vector<int> labels);
};

struct SplitSpec {
  int train_per_class = 0;
  int test_per_class = 0;
  double unary_fraction = 0.7;
  std::uint64_t seed = 0;
};

// Disjoint per-class pixel index sets. betaValidation holds the part of the
// training pixels not used to fit the unary model.
struct Split {
  int class_count = 0;
  std::vector<std::vector<int>> unary_train;      // [class-1] -> pixel indices
  std::vector<std::vector<int>> beta_validation;  // [class-1] -> pixel indices
  std::vector<std::vector<int>> test;             // [class-1] -> pixel indices

  std::vector<int> all_unary_train() const;
  std::vector<int> all_beta_validation() const;
  std::vector<int> all_training() const;  // unary_train followed by beta_validation, per class
  std::vector<int> all_test() const;

  // FNV-1a digest of the three index sets. Canonical for splits built by
  // make_split, which stores every set sorted ascending.
  std::uint64_t digest() const;
};

// Reads an ASCII key:value header (keys: width, height, bands, data,
// byteorder, dtype, layout) plus its float32 little-endian BSQ payload.
SpectralCube load_cube(const std::filesystem::path& header_path);

// Writes header + payload in the same format; values are rounded to float32.
void write_cube(const SpectralCube& cube, const std::filesystem::path& header_path,
                const std::string& payload_name);

// ASCII CSV of integers, height rows x width columns. class_count is the
// maximum label present. Pass width/height <= 0 to infer the size from the
// file instead of validating against expected dimensions.
LabelMap load_labels(const std::filesystem::path& path, int expected_width = -1,
                     int expected_height = -1);

void write_labels(const LabelMap& labels, const std::filesystem::path& path);
void write_labels(const std::vector<int>& labels, int width, int height,
                  const std::filesystem::path& path);

// Z-scores every band over all pixels of the image (population standard
// deviation). A constant band maps to all zeros.
SpectralCube normalize_bands(const SpectralCube& cube);

// Deterministic per-class sampling: each class's labeled pixel indices are
// sorted ascending, shuffled with Rng(spec.seed), and cut into
// [test | unary_train | beta_validation] blocks. The unary/validation cut is
// at round-half-up of unary_fraction * train_per_class.
Split make_split(const LabelMap& labels, const SplitSpec& spec);

// Drops classes with fewer than min_pixels labeled pixels and densely remaps
// the survivors to 1..C' by ascending original index. Returns the filtered
// map and the original index of each kept class (kept_original[new-1]).
struct ClassFilterResult {
  LabelMap labels;
  std::vector<int> kept_original;
  std::vector<int> original_counts;  // per original class, 1-based at [c-1]
};
ClassFilterResult filter_classes(const LabelMap& labels, int min_pixels);

}  // namespace samrf
