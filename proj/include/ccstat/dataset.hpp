#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccstat/image.hpp"
#include "ccstat/image_io.hpp"

namespace ccstat {

/// One manifest row. Ground truth is kept exactly as given; it is never
/// normalized on ingest.
struct DatasetRecord {
  std::string image_id;
  std::filesystem::path image_path;
  std::optional<std::filesystem::path> mask_path;
  std::optional<Rgb<double>> ground_truth;
  std::optional<int> fold;
};

/// Manifest CSV with header `image_id,image_path,mask_path,e_R,e_G,e_B,fold`.
/// Empty cells are absent values. Relative paths resolve against `base_dir`.
std::vector<DatasetRecord> parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});
void write_manifest(std::ostream& out, const std::vector<DatasetRecord>& records);

/// Parses the manifest and checks that every referenced file exists.
/// Relative paths resolve against the manifest's own directory.
std::vector<DatasetRecord> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);

/// Partition of a dataset into K folds; every image appears exactly once and
/// no fold is empty.
struct FoldAssignment {
  std::map<std::string, int> fold_of;
  int fold_count = 0;

  /// Throws DataError unless this partitions exactly the records' ids.
  void Validate(const std::vector<std::string>& image_ids) const;
};

FoldAssignment folds_from_manifest(const std::vector<DatasetRecord>& records);
/// CSV `image_id,fold`, validated against the records.
FoldAssignment load_folds(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);
void save_folds(const std::filesystem::path& path, const FoldAssignment& folds);
/// Image i goes to fold i mod K.
FoldAssignment round_robin_folds(const std::vector<std::string>& image_ids, int fold_count);

/// Image plus the pixels an estimator may use.
struct Sample {
  LinearImage image;
  PixelMask mask;
};

/// A collection of images without ground truth. Tuning code that must not see
/// ground truth takes this interface.
class ImageSet {
 public:
  virtual ~ImageSet() = default;
  virtual std::size_t size() const = 0;
  virtual const std::string& id(std::size_t index) const = 0;
  virtual Sample load(std::size_t index) const = 0;
};

/// An image collection whose members carry ground-truth illuminants.
class LabeledImageSet : public ImageSet {
 public:
  virtual const Rgb<double>& ground_truth(std::size_t index) const = 0;
};

/// Images decoded lazily from a manifest. Loading applies the record's mask
/// (if any) and the saturation/dark thresholds.
class ManifestImageSet final : public LabeledImageSet {
 public:
  ManifestImageSet(std::vector<DatasetRecord> records, DecodeOptions decode = {}, MaskThresholds thresholds = {});

  std::size_t size() const override { return records_.size(); }
  const std::string& id(std::size_t index) const override { return records_.at(index).image_id; }
  Sample load(std::size_t index) const override;
  /// Throws DataError if the record has no ground truth.
  const Rgb<double>& ground_truth(std::size_t index) const override;

  bool has_ground_truth() const;
  const std::vector<DatasetRecord>& records() const { return records_; }

 private:
  std::vector<DatasetRecord> records_;
  DecodeOptions decode_;
  MaskThresholds thresholds_;
};

struct LabeledSample {
  std::string image_id;
  LinearImage image;
  PixelMask mask;
  Rgb<double> ground_truth;
};

class InMemoryImageSet final : public LabeledImageSet {
 public:
  explicit InMemoryImageSet(std::vector<LabeledSample> samples);

  std::size_t size() const override { return samples_.size(); }
  const std::string& id(std::size_t index) const override { return samples_.at(index).image_id; }
  Sample load(std::size_t index) const override;
  const Rgb<double>& ground_truth(std::size_t index) const override { return samples_.at(index).ground_truth; }

  const LabeledSample& at(std::size_t index) const { return samples_.at(index); }
  LabeledSample& at(std::size_t index) { return samples_.at(index); }

 private:
  std::vector<LabeledSample> samples_;
};

/// Mondrian-style scenes under a uniform illuminant drawn around a fixed
/// chromaticity: green varies little, red and blue trade off along a line.
struct SyntheticSpec {
  int image_count = 20;
  int width = 64;
  int height = 48;
  int min_patches = 8;
  int max_patches = 24;
  double min_reflectance = 0.05;
  double max_reflectance = 1.0;
  Eigen::Vector3d chromaticity_mean{0.32, 0.36, 0.32};
  double green_spread = 0.0106;
  double red_blue_spread = 0.0723;
  /// Brightest illuminant channel as a fraction of white_level.
  double brightness = 0.8;
  double white_level = 65535.0;
  /// Additive Gaussian noise standard deviation as a fraction of white_level.
  double noise = 0.0;
  std::uint64_t seed = 1;

  void Validate() const;
};

struct SyntheticScene {
  std::string image_id;
  LinearImage image;
  /// Per-pixel reflectance in [0, 1]; the noise-free image is reflectance * illuminant.
  Image<double> reflectance;
  Rgb<double> illuminant;
};

/// Fully determined by spec.seed.
std::vector<SyntheticScene> synthesize_dataset(const SyntheticSpec& spec);

/// Wraps scenes with all-included masks (after the given thresholds).
InMemoryImageSet to_image_set(const std::vector<SyntheticScene>& scenes, const MaskThresholds& thresholds = {});

}  // namespace ccstat
