#include "ccstat/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "ccstat/csv.hpp"
#include "ccstat/error.hpp"
#include "ccstat/estimators.hpp"

namespace ccstat {

namespace {

constexpr const char* kManifestHeader = "image_id,image_path,mask_path,e_R,e_G,e_B,fold";

std::filesystem::path resolve(const std::string& cell, const std::filesystem::path& base_dir) {
  std::filesystem::path path(cell);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  return path.lexically_normal();
}

int parse_fold(const std::string& cell) {
  const double value = parse_number(cell);
  if (value < 0 || value != std::floor(value) || value > 1e6) throw std::invalid_argument("fold must be a nonnegative integer");
  return static_cast<int>(value);
}

}  // namespace

std::vector<DatasetRecord> parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("manifest is empty");
  if (csv::strip_cr(line) != kManifestHeader)
    throw DataError(std::string("manifest header must be '") + kManifestHeader + "'");

  std::vector<DatasetRecord> records;
  std::set<std::string> seen;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    line = csv::strip_cr(line);
    if (line.empty()) continue;
    const std::string where = "manifest line " + std::to_string(line_number);
    try {
      const auto cells = csv::split(line);
      if (cells.size() != 7) throw std::invalid_argument("expected 7 columns, got " + std::to_string(cells.size()));

      DatasetRecord record;
      record.image_id = cells[0];
      if (record.image_id.empty()) throw std::invalid_argument("empty image_id");
      if (cells[1].empty()) throw std::invalid_argument("empty image_path");
      record.image_path = resolve(cells[1], base_dir);
      if (!cells[2].empty()) record.mask_path = resolve(cells[2], base_dir);

      const int present = !cells[3].empty() + !cells[4].empty() + !cells[5].empty();
      if (present == 3) {
        Rgb<double> e(parse_number(cells[3]), parse_number(cells[4]), parse_number(cells[5]));
        if (!e.allFinite() || (e.array() < 0).any() || (e.array() == 0).all())
          throw std::invalid_argument("ground truth must be finite, nonnegative and nonzero");
        record.ground_truth = e;
      } else if (present != 0) {
        throw std::invalid_argument("ground truth needs all of e_R, e_G, e_B or none");
      }
      if (!cells[6].empty()) record.fold = parse_fold(cells[6]);

      if (!seen.insert(record.image_id).second) throw std::invalid_argument("duplicate image_id '" + record.image_id + "'");
      records.push_back(std::move(record));
    } catch (const std::invalid_argument& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return records;
}

void write_manifest(std::ostream& out, const std::vector<DatasetRecord>& records) {
  out << kManifestHeader << '\n';
  for (const auto& r : records) {
    std::vector<std::string> cells = {r.image_id, r.image_path.string(), r.mask_path ? r.mask_path->string() : ""};
    for (int c = 0; c < 3; ++c) cells.push_back(r.ground_truth ? format_number((*r.ground_truth)[c]) : "");
    cells.push_back(r.fold ? std::to_string(*r.fold) : "");
    out << csv::join(cells) << '\n';
  }
}

std::vector<DatasetRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
  auto records = parse_manifest(in, std::filesystem::absolute(path).parent_path());
  for (const auto& r : records) {
    if (!std::filesystem::exists(r.image_path))
      throw DataError("image '" + r.image_id + "': missing file '" + r.image_path.string() + "'");
    if (r.mask_path && !std::filesystem::exists(*r.mask_path))
      throw DataError("image '" + r.image_id + "': missing mask '" + r.mask_path->string() + "'");
  }
  return records;
}

void save_manifest(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest '" + path.string() + "'");
  write_manifest(out, records);
  if (!out) throw DataError("cannot write manifest '" + path.string() + "'");
}

void FoldAssignment::Validate(const std::vector<std::string>& image_ids) const {
  if (fold_count < 2) throw DataError("cross-validation needs at least 2 folds");
  std::vector<int> sizes(fold_count, 0);
  for (const auto& [id, fold] : fold_of) {
    if (fold < 0 || fold >= fold_count) throw DataError("image '" + id + "': fold out of range");
    ++sizes[fold];
  }
  const std::set<std::string> ids(image_ids.begin(), image_ids.end());
  for (const auto& [id, fold] : fold_of)
    if (!ids.count(id)) throw DataError("fold assignment references unknown image '" + id + "'");
  for (const auto& id : ids)
    if (!fold_of.count(id)) throw DataError("image '" + id + "' has no fold");
  for (int k = 0; k < fold_count; ++k)
    if (sizes[k] == 0) throw DataError("fold " + std::to_string(k) + " is empty");
}

namespace {

std::vector<std::string> ids_of(const std::vector<DatasetRecord>& records) {
  std::vector<std::string> ids;
  for (const auto& r : records) ids.push_back(r.image_id);
  return ids;
}

/// Fold ids as given may be any distinct nonnegative labels; they are
/// renumbered to 0..K-1 in ascending order.
FoldAssignment compact(const std::map<std::string, int>& raw) {
  std::set<int> labels;
  for (const auto& [id, fold] : raw) labels.insert(fold);
  std::map<int, int> index;
  for (int label : labels) index.emplace(label, static_cast<int>(index.size()));
  FoldAssignment folds;
  folds.fold_count = static_cast<int>(labels.size());
  for (const auto& [id, fold] : raw) folds.fold_of[id] = index[fold];
  return folds;
}

}  // namespace

FoldAssignment folds_from_manifest(const std::vector<DatasetRecord>& records) {
  std::map<std::string, int> raw;
  for (const auto& r : records) {
    if (!r.fold) throw DataError("image '" + r.image_id + "' has no fold in the manifest");
    raw[r.image_id] = *r.fold;
  }
  FoldAssignment folds = compact(raw);
  folds.Validate(ids_of(records));
  return folds;
}

FoldAssignment load_folds(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open fold file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || csv::strip_cr(line) != "image_id,fold")
    throw DataError("fold file header must be 'image_id,fold'");
  std::map<std::string, int> raw;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    line = csv::strip_cr(line);
    if (line.empty()) continue;
    try {
      const auto cells = csv::split(line);
      if (cells.size() != 2) throw std::invalid_argument("expected 2 columns");
      if (!raw.emplace(cells[0], parse_fold(cells[1])).second)
        throw std::invalid_argument("image '" + cells[0] + "' listed twice");
    } catch (const std::invalid_argument& e) {
      throw DataError("fold file line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  FoldAssignment folds = compact(raw);
  folds.Validate(ids_of(records));
  return folds;
}

void save_folds(const std::filesystem::path& path, const FoldAssignment& folds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write fold file '" + path.string() + "'");
  out << "image_id,fold\n";
  for (const auto& [id, fold] : folds.fold_of) out << csv::join({id, std::to_string(fold)}) << '\n';
}

FoldAssignment round_robin_folds(const std::vector<std::string>& image_ids, int fold_count) {
  if (fold_count < 2 || static_cast<std::size_t>(fold_count) > image_ids.size())
    throw std::invalid_argument("fold count must lie in [2, image count]");
  FoldAssignment folds;
  folds.fold_count = fold_count;
  for (std::size_t i = 0; i < image_ids.size(); ++i) folds.fold_of[image_ids[i]] = static_cast<int>(i % fold_count);
  folds.Validate(image_ids);
  return folds;
}

ManifestImageSet::ManifestImageSet(std::vector<DatasetRecord> records, DecodeOptions decode, MaskThresholds thresholds)
    : records_(std::move(records)), decode_(decode), thresholds_(thresholds) {}

Sample ManifestImageSet::load(std::size_t index) const {
  const DatasetRecord& record = records_.at(index);
  try {
    LinearImage image = load_image(record.image_path, decode_);
    std::optional<PixelMask> mask;
    if (record.mask_path) mask = load_mask(*record.mask_path);
    PixelMask effective = effective_mask(image, mask, thresholds_);
    return {std::move(image), std::move(effective)};
  } catch (const DataError& e) {
    throw DataError("image '" + record.image_id + "': " + e.what());
  }
}

const Rgb<double>& ManifestImageSet::ground_truth(std::size_t index) const {
  const DatasetRecord& record = records_.at(index);
  if (!record.ground_truth) throw DataError("image '" + record.image_id + "' has no ground truth");
  return *record.ground_truth;
}

bool ManifestImageSet::has_ground_truth() const {
  for (const auto& r : records_)
    if (!r.ground_truth) return false;
  return true;
}

InMemoryImageSet::InMemoryImageSet(std::vector<LabeledSample> samples) : samples_(std::move(samples)) {
  std::set<std::string> seen;
  for (const auto& s : samples_) {
    if (!seen.insert(s.image_id).second) throw DataError("duplicate image_id '" + s.image_id + "'");
    if (!s.mask.Matches(s.image)) throw DataError("image '" + s.image_id + "': mask size mismatch");
  }
}

Sample InMemoryImageSet::load(std::size_t index) const {
  const auto& s = samples_.at(index);
  return {s.image, s.mask};
}

void SyntheticSpec::Validate() const {
  if (image_count < 1 || width < 1 || height < 1) throw std::invalid_argument("synthetic counts must be >= 1");
  if (min_patches < 0 || max_patches < min_patches) throw std::invalid_argument("bad patch count range");
  if (!(min_reflectance >= 0) || !(max_reflectance >= min_reflectance) || max_reflectance > 1)
    throw std::invalid_argument("reflectance range must lie within [0, 1]");
  if ((chromaticity_mean.array() <= 0).any() || std::abs(chromaticity_mean.sum() - 1) > 1e-9)
    throw std::invalid_argument("chromaticity mean must be positive and sum to 1");
  if (!(green_spread >= 0) || !(red_blue_spread >= 0) || !(noise >= 0)) throw std::invalid_argument("spreads must be >= 0");
  if (!(brightness > 0) || brightness > 1) throw std::invalid_argument("brightness must lie in (0, 1]");
  if (!(white_level > 0)) throw std::invalid_argument("white level must be positive");
}

std::vector<SyntheticScene> synthesize_dataset(const SyntheticSpec& spec) {
  spec.Validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> reflectance(spec.min_reflectance, spec.max_reflectance);
  std::uniform_int_distribution<int> patches(spec.min_patches, spec.max_patches);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  std::vector<SyntheticScene> scenes;
  scenes.reserve(spec.image_count);
  for (int n = 0; n < spec.image_count; ++n) {
    std::array<Plane<double>, 3> refl;
    for (auto& plane : refl) plane.resize(spec.height, spec.width);
    for (int c = 0; c < 3; ++c) refl[c].setConstant(reflectance(rng));

    const int patch_count = patches(rng);
    for (int k = 0; k < patch_count; ++k) {
      const int pw = uniform_int(std::max(1, spec.width / 8), std::max(1, spec.width / 2));
      const int ph = uniform_int(std::max(1, spec.height / 8), std::max(1, spec.height / 2));
      const int x0 = uniform_int(0, spec.width - pw);
      const int y0 = uniform_int(0, spec.height - ph);
      for (int c = 0; c < 3; ++c) refl[c].block(y0, x0, ph, pw).setConstant(reflectance(rng));
    }

    Eigen::Vector3d chroma = spec.chromaticity_mean;
    const double dg = spec.green_spread * normal(rng);
    const double drb = spec.red_blue_spread * normal(rng);
    chroma[kGreen] += dg;
    chroma[kRed] += drb - dg / 2;
    chroma[kBlue] -= drb + dg / 2;
    chroma = chroma.cwiseMax(1e-3);
    chroma /= chroma.sum();
    const Rgb<double> illuminant = chroma * (spec.brightness * spec.white_level / chroma.maxCoeff());

    std::array<Plane<double>, 3> pixels;
    for (int c = 0; c < 3; ++c) pixels[c] = refl[c] * illuminant[c];
    if (spec.noise > 0) {
      const double stddev = spec.noise * spec.white_level;
      for (auto& plane : pixels)
        for (Eigen::Index i = 0; i < plane.size(); ++i)
          plane.data()[i] = std::clamp(plane.data()[i] + stddev * normal(rng), 0.0, spec.white_level);
    }

    char id[32];
    std::snprintf(id, sizeof id, "synth_%05d", n);
    scenes.push_back({id, LinearImage(std::move(pixels), spec.white_level), Image<double>(std::move(refl), 1.0), illuminant});
  }
  return scenes;
}

InMemoryImageSet to_image_set(const std::vector<SyntheticScene>& scenes, const MaskThresholds& thresholds) {
  std::vector<LabeledSample> samples;
  samples.reserve(scenes.size());
  for (const auto& s : scenes)
    samples.push_back({s.image_id, s.image, effective_mask(s.image, std::nullopt, thresholds), s.illuminant});
  return InMemoryImageSet(std::move(samples));
}

}  // namespace ccstat
