#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "ccstat/ccstat.hpp"
#include "ccstat/csv.hpp"
#include "ccstat/parallel.hpp"

namespace ccstat::cli {

namespace {

namespace fs = std::filesystem;

const char* const kDefaultMethods = "shades_of_gray,general_gray_world,gray_edge_1,gray_edge_2";

struct RunConfig {
  std::string command;
  std::string manifest;
  std::string eval_manifest;
  std::string folds;
  std::string out;
  int workers = 1;
  std::uint64_t seed = 1;

  double saturation = 0.98;
  double dark_level = 0.0;
  std::optional<double> white_level;

  std::string n_values;
  std::string p_values;
  std::string sigma_values;

  std::string methods = kDefaultMethods;
  std::string method;
  std::optional<double> p;
  std::optional<double> sigma;
  std::string params;
  std::vector<std::string> scatter_params = {"n=0,p=2,sigma=0", "n=0,p=15,sigma=0"};

  SyntheticSpec synth;
  int synth_folds = 3;
  std::string synth_format = "png";
  int synth_bit_depth = 16;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> parse_values(const std::string& text, const char* flag) {
  std::vector<double> values;
  for (const auto& item : split_list(text)) values.push_back(parse_number(item));
  if (values.empty()) throw std::invalid_argument(std::string(flag) + " needs at least one value");
  return values;
}

GridValues grid_values(const RunConfig& config) {
  GridValues values = GridValues::Default();
  if (!config.n_values.empty()) {
    values.orders.clear();
    for (double n : parse_values(config.n_values, "--n-values")) {
      if (n != std::floor(n) || n < 0 || n > 2) throw std::invalid_argument("--n-values entries must be 0, 1 or 2");
      values.orders.push_back(static_cast<int>(n));
    }
  }
  if (!config.p_values.empty()) values.norms = parse_values(config.p_values, "--p-values");
  if (!config.sigma_values.empty()) values.sigmas = parse_values(config.sigma_values, "--sigma-values");
  build_grid(values);
  return values;
}

std::vector<MethodGrid> method_grids(const RunConfig& config) {
  const GridValues base = grid_values(config);
  std::vector<MethodGrid> methods;
  for (const auto& name : split_list(config.methods)) {
    const MethodFamily family = parse_method(name);
    methods.push_back({name, build_grid(GridValues::ForFamily(family, base))});
  }
  if (methods.empty()) throw std::invalid_argument("--methods must name at least one method");
  return methods;
}

ParameterTuple selected_tuple(const RunConfig& config) {
  if (!config.params.empty()) {
    if (!config.method.empty()) throw std::invalid_argument("use either --params or --method, not both");
    return ParameterTuple::Parse(config.params);
  }
  if (config.method.empty()) throw std::invalid_argument("estimate needs --params or --method");
  NamedMethod method{parse_method(config.method)};
  const bool needs_p = method.family != MethodFamily::kGrayWorld && method.family != MethodFamily::kWhitePatch;
  const bool needs_sigma = needs_p && method.family != MethodFamily::kShadesOfGray;
  if (needs_p && !config.p) throw std::invalid_argument("--method " + config.method + " needs --p");
  if (!needs_p && config.p) throw std::invalid_argument("--method " + config.method + " takes no --p");
  if (!needs_sigma && config.sigma) throw std::invalid_argument("--method " + config.method + " takes no --sigma");
  method.p = config.p.value_or(1.0);
  method.sigma = config.sigma.value_or(0.0);
  return method.ToParameters();
}

ManifestImageSet open_manifest(const std::string& path, const RunConfig& config) {
  if (path.empty()) throw std::invalid_argument("--manifest is required");
  DecodeOptions decode;
  decode.white_level = config.white_level;
  return ManifestImageSet(load_manifest(path), decode, {config.saturation, config.dark_level});
}

ManifestImageSet open_labeled(const std::string& path, const RunConfig& config) {
  ManifestImageSet set = open_manifest(path, config);
  if (!set.has_ground_truth()) throw DataError("manifest '" + path + "' lacks ground truth for some images");
  return set;
}

std::vector<std::pair<std::string, std::string>> run_metadata(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> meta = {
      {"command", config.command},
      {"manifest", config.manifest},
      {"seed", std::to_string(config.seed)},
      {"saturation_fraction", format_number(config.saturation)},
      {"dark_level", format_number(config.dark_level)},
      {"white_level_override", config.white_level ? format_number(*config.white_level) : ""},
      {"border_handling", "reflect"},
      {"kernel_truncation", "ceil(3 sigma)"},
      {"quantiles", "linear interpolation"},
      {"frames", "full resolution"},
  };
  if (!config.folds.empty()) meta.emplace_back("folds", config.folds);
  if (!config.eval_manifest.empty()) meta.emplace_back("eval_manifest", config.eval_manifest);
  return meta;
}

void add_grid_metadata(std::vector<std::pair<std::string, std::string>>& meta, std::span<const MethodGrid> methods) {
  for (const auto& m : methods) {
    std::string tuples;
    for (const auto& t : m.grid) tuples += (tuples.empty() ? "" : ";") + t.ToString();
    meta.emplace_back("grid." + m.name, tuples);
  }
}

/// Rows of an error matrix restricted to one method's tuples.
ErrorMatrix slice(const ErrorMatrix& errors, const ParameterGrid& full, const ParameterGrid& sub) {
  ErrorMatrix out;
  out.image_ids = errors.image_ids;
  out.errors.resize(static_cast<Eigen::Index>(sub.size()), errors.errors.cols());
  for (std::size_t i = 0; i < sub.size(); ++i)
    out.errors.row(static_cast<Eigen::Index>(i)) = errors.errors.row(static_cast<Eigen::Index>(*full.find(sub[i])));
  return out;
}

EstimateTable slice(const EstimateTable& table, const ParameterGrid& full, const ParameterGrid& sub) {
  EstimateTable out;
  out.image_ids = table.image_ids;
  for (const auto& t : sub) out.per_tuple.push_back(table.per_tuple[*full.find(t)]);
  return out;
}

std::vector<double> present_row(const ErrorMatrix& errors, Eigen::Index row, std::size_t* missing = nullptr) {
  std::vector<double> values;
  for (double e : errors.errors.row(row))
    if (!std::isnan(e)) values.push_back(e);
  if (missing) *missing = static_cast<std::size_t>(errors.errors.cols()) - values.size();
  return values;
}

void finish(const ReportBundle& bundle, const RunConfig& config, std::ostream& out) {
  if (config.out.empty()) return;
  write_results(bundle, config.out);
  out << "wrote report bundle to " << config.out << '\n';
}

std::string estimate_row(const std::string& id, const Rgb<double>& e) {
  const Chromaticity c = to_chromaticity(e);
  return csv::join({id, csv::format_real(e[0]), csv::format_real(e[1]), csv::format_real(e[2]),
                    csv::format_real(c.r), csv::format_real(c.g), csv::format_real(c.b)});
}

int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const ParameterTuple tuple = selected_tuple(config);
  const ManifestImageSet images = open_manifest(config.manifest, config);

  std::vector<std::optional<Rgb<double>>> estimates(images.size());
  parallel_for(images.size(), config.workers, [&](std::size_t j) {
    const Sample sample = images.load(j);
    estimates[j] = try_estimate(sample.image, sample.mask, tuple);
  });

  std::ostringstream csv_text;
  csv_text << "image_id,e_R,e_G,e_B,r,g,b\n";
  std::size_t zero = 0;
  for (std::size_t j = 0; j < images.size(); ++j) {
    if (!estimates[j]) {
      ++zero;
      err << "warning: image '" << images.id(j) << "' produced an all-zero estimate; skipped\n";
      continue;
    }
    csv_text << estimate_row(images.id(j), *estimates[j]) << '\n';
  }

  if (config.out.empty()) {
    out << csv_text.str();
  } else {
    ReportBundle bundle;
    bundle.metadata = run_metadata(config);
    bundle.metadata.emplace_back("params", tuple.ToString());
    bundle.metadata.emplace_back("zero_signal_images", std::to_string(zero));
    write_results(bundle, config.out);
    std::ofstream file(fs::path(config.out) / "estimates.csv", std::ios::trunc);
    file << csv_text.str();
    if (!file) throw DataError("cannot write estimates.csv");
  }
  if (images.size() > 0 && zero == images.size()) {
    err << "error: every image produced an all-zero estimate\n";
    return kDegenerateResult;
  }
  return kSuccess;
}

int cmd_tune(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto methods = method_grids(config);
  const ManifestImageSet images = open_labeled(config.manifest, config);
  const ParameterGrid grid = merge_grids(methods);
  const ErrorMatrix errors = evaluate_grid(images, grid, config.workers);
  if (errors.missing_count() > 0) err << "note: " << errors.missing_count() << " (tuple, image) estimates were all-zero\n";

  ReportBundle bundle;
  bundle.metadata = run_metadata(config);
  add_grid_metadata(bundle.metadata, methods);
  bundle.error_tuples.assign(grid.begin(), grid.end());
  bundle.errors = errors;
  for (const auto& m : methods) {
    const TuningResult tuned = tune_supervised(slice(errors, grid, m.grid), m.grid);
    const auto chosen = present_row(errors, static_cast<Eigen::Index>(*grid.find(tuned.chosen)));
    bundle.summaries.emplace_back(m.name + " [" + tuned.chosen.ToString() + "]", summarize(chosen));
    bundle.tuning.emplace_back(m.name, tuned);
  }
  out << "Whole-set supervised tuning (criterion: median angular error)\n"
      << format_summary_table(bundle.summaries);
  finish(bundle, config, out);
  return kSuccess;
}

FoldAssignment resolve_folds(const RunConfig& config, const ManifestImageSet& images) {
  if (!config.folds.empty()) return load_folds(config.folds, images.records());
  const auto& records = images.records();
  if (std::all_of(records.begin(), records.end(), [](const DatasetRecord& r) { return r.fold.has_value(); }))
    return folds_from_manifest(records);
  throw std::invalid_argument("cross-validation needs --folds or a fold column in the manifest");
}

int cmd_crossval(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto methods = method_grids(config);
  const ManifestImageSet images = open_labeled(config.manifest, config);
  const FoldAssignment folds = resolve_folds(config, images);
  const ParameterGrid grid = merge_grids(methods);
  const ErrorMatrix errors = evaluate_grid(images, grid, config.workers);

  ReportBundle bundle;
  bundle.metadata = run_metadata(config);
  bundle.metadata.emplace_back("fold_count", std::to_string(folds.fold_count));
  add_grid_metadata(bundle.metadata, methods);
  bundle.error_tuples.assign(grid.begin(), grid.end());
  bundle.errors = errors;
  Table test_table{"test_errors.csv", {"method", "image_id", "fold", "error"}, {}};
  Table fold_table{"folds.csv", {"method", "fold", "tuple", "training_median"}, {}};

  for (const auto& m : methods) {
    const CrossValidationResult cv = cross_validate(slice(errors, grid, m.grid), folds, m.grid);
    if (cv.missing_count) err << "note: " << m.name << ": " << cv.missing_count << " test images had all-zero estimates\n";
    if (cv.test_errors.empty()) throw DegenerateError(m.name + ": no test errors");
    bundle.summaries.emplace_back(m.name, summarize(cv.test_errors));
    for (std::size_t t = 0; t < cv.test_errors.size(); ++t)
      test_table.rows.push_back({m.name, cv.test_ids[t], std::to_string(cv.test_folds[t]), csv::format_real(cv.test_errors[t])});
    for (std::size_t k = 0; k < cv.per_fold.size(); ++k) {
      fold_table.rows.push_back({m.name, std::to_string(k), cv.per_fold[k].chosen.ToString(),
                                 csv::format_real(cv.per_fold[k].criterion_value)});
      bundle.tuning.emplace_back(m.name + "/fold" + std::to_string(k), cv.per_fold[k]);
    }
  }
  bundle.tables = {test_table, fold_table};

  out << folds.fold_count << "-fold cross-validation (combined test folds)\n" << format_summary_table(bundle.summaries);
  out << "\nchosen tuples per fold\n";
  for (const auto& row : fold_table.rows) out << "  " << row[0] << " fold " << row[1] << ": " << row[2] << '\n';
  finish(bundle, config, out);
  return kSuccess;
}

int cmd_greenstab(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto methods = method_grids(config);
  const ParameterGrid grid = merge_grids(methods);
  ReportBundle bundle;
  bundle.metadata = run_metadata(config);
  add_grid_metadata(bundle.metadata, methods);

  // Training images are handed over as an ImageSet, which has no ground truth.
  const ManifestImageSet training = open_manifest(config.manifest, config);

  if (!config.folds.empty()) {
    // Unsupervised tuning on the training folds, evaluation on the held-out fold.
    if (!training.has_ground_truth()) throw DataError("fold evaluation needs ground truth in the manifest");
    const FoldAssignment folds = load_folds(config.folds, training.records());
    const EstimateTable table = estimate_grid(static_cast<const ImageSet&>(training), grid, config.workers);
    const ErrorMatrix errors = errors_from_estimates(table, training);
    Table fold_table{"folds.csv", {"method", "fold", "tuple", "green_std"}, {}};
    for (const auto& m : methods) {
      const EstimateTable sub = slice(table, grid, m.grid);
      std::vector<double> test_errors;
      for (int k = 0; k < folds.fold_count; ++k) {
        EstimateTable train;
        std::vector<Eigen::Index> train_cols, test_cols;
        for (std::size_t j = 0; j < sub.image_ids.size(); ++j)
          (folds.fold_of.at(sub.image_ids[j]) == k ? test_cols : train_cols).push_back(static_cast<Eigen::Index>(j));
        for (const auto& est : sub.per_tuple) {
          Eigen::Matrix3Xd cols(3, static_cast<Eigen::Index>(train_cols.size()));
          for (std::size_t c = 0; c < train_cols.size(); ++c) cols.col(static_cast<Eigen::Index>(c)) = est.col(train_cols[c]);
          train.per_tuple.push_back(std::move(cols));
        }
        for (auto c : train_cols) train.image_ids.push_back(sub.image_ids[static_cast<std::size_t>(c)]);
        const TuningResult tuned = tune_green_stability(train, m.grid);
        bundle.tuning.emplace_back(m.name + "/fold" + std::to_string(k), tuned);
        fold_table.rows.push_back({m.name, std::to_string(k), tuned.chosen.ToString(), csv::format_real(tuned.criterion_value)});
        const auto row = static_cast<Eigen::Index>(*grid.find(tuned.chosen));
        for (auto c : test_cols)
          if (!std::isnan(errors.errors(row, c))) test_errors.push_back(errors.errors(row, c));
      }
      if (test_errors.empty()) throw DegenerateError(m.name + ": no test errors");
      bundle.summaries.emplace_back(m.name, summarize(test_errors));
    }
    bundle.tables = {fold_table};
    out << "Green stability tuning per fold (combined test folds)\n" << format_summary_table(bundle.summaries);
    finish(bundle, config, out);
    return kSuccess;
  }

  const EstimateTable table = estimate_grid(static_cast<const ImageSet&>(training), grid, config.workers);
  std::vector<std::pair<std::string, TuningResult>> chosen;
  for (const auto& m : methods) {
    const TuningResult tuned = tune_green_stability(slice(table, grid, m.grid), m.grid);
    chosen.emplace_back(m.name, tuned);
    out << m.name << ": " << tuned.chosen.ToString() << "  green_std=" << csv::format_real(tuned.criterion_value) << '\n';
  }
  bundle.tuning = chosen;

  if (!config.eval_manifest.empty()) {
    const ManifestImageSet eval = open_labeled(config.eval_manifest, config);
    std::vector<ParameterTuple> picked;
    for (const auto& [name, tuned] : chosen) picked.push_back(tuned.chosen);
    const ParameterGrid eval_grid(picked);
    const ErrorMatrix errors = evaluate_grid(eval, eval_grid, config.workers);
    for (const auto& [name, tuned] : chosen) {
      std::size_t missing = 0;
      const auto row = present_row(errors, static_cast<Eigen::Index>(*eval_grid.find(tuned.chosen)), &missing);
      if (missing) err << "note: " << name << ": " << missing << " evaluation images had all-zero estimates\n";
      if (row.empty()) throw DegenerateError(name + ": no evaluation errors");
      bundle.summaries.emplace_back(name + " [" + tuned.chosen.ToString() + "]", summarize(row));
    }
    bundle.error_tuples.assign(eval_grid.begin(), eval_grid.end());
    bundle.errors = errors;
    out << "\nHeld-out evaluation\n" << format_summary_table(bundle.summaries);
  }
  finish(bundle, config, out);
  return kSuccess;
}

int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto methods = method_grids(config);
  const ManifestImageSet images = open_labeled(config.manifest, config);

  std::vector<ParameterTuple> scatter;
  for (const auto& s : config.scatter_params) scatter.push_back(ParameterTuple::Parse(s));
  const ParameterGrid method_union = merge_grids(methods);
  std::vector<ParameterTuple> all(method_union.begin(), method_union.end());
  all.insert(all.end(), scatter.begin(), scatter.end());
  const ParameterGrid grid(all);

  const EstimateTable table = estimate_grid(images, grid, config.workers);
  const ErrorMatrix errors = errors_from_estimates(table, images);
  std::vector<std::string> dropped;
  const auto stats = method_statistics(table, errors, grid, methods, &dropped);
  for (const auto& name : dropped) err << "note: method " << name << " dropped (fewer than two usable tuples)\n";
  const auto pairs = difference_pairs(stats);

  ReportBundle bundle;
  bundle.metadata = run_metadata(config);
  add_grid_metadata(bundle.metadata, methods);
  bundle.pairs = pairs;

  Table method_table{"method_stats.csv", {"method", "tuple", "green_std", "median"}, {}};
  for (const auto& m : stats)
    for (std::size_t i = 0; i < m.tuples.size(); ++i)
      method_table.rows.push_back({m.name, m.tuples[i].ToString(), csv::format_real(m.green_stds[i]), csv::format_real(m.medians[i])});

  Table gt_table{"scatter_ground_truth.csv", {"image_id", "r", "g", "b"}, {}};
  std::vector<Rgb<double>> truths;
  for (std::size_t j = 0; j < images.size(); ++j) {
    const Chromaticity c = to_chromaticity(images.ground_truth(j));
    truths.push_back(images.ground_truth(j));
    gt_table.rows.push_back({images.id(j), csv::format_real(c.r), csv::format_real(c.g), csv::format_real(c.b)});
  }
  Table est_table{"scatter_estimates.csv", {"tuple", "image_id", "r", "g", "b"}, {}};
  for (const auto& t : scatter) {
    const auto& est = table.per_tuple[*grid.find(t)];
    for (Eigen::Index j = 0; j < est.cols(); ++j) {
      if (EstimateTable::missing(est.col(j))) continue;
      const Chromaticity c = to_chromaticity(est.col(j));
      est_table.rows.push_back({t.ToString(), table.image_ids[static_cast<std::size_t>(j)], csv::format_real(c.r),
                                csv::format_real(c.g), csv::format_real(c.b)});
    }
  }
  bundle.tables = {method_table, gt_table, est_table};

  if (truths.size() >= 2) {
    const Eigen::Vector3d gt_std = chromaticity_std(truths);
    out << "ground-truth chromaticity std (r, g, b): " << csv::format_real(gt_std[0]) << ", "
        << csv::format_real(gt_std[1]) << ", " << csv::format_real(gt_std[2]) << '\n';
    bundle.metadata.emplace_back("ground_truth_chromaticity_std",
                                 csv::format_real(gt_std[0]) + ";" + csv::format_real(gt_std[1]) + ";" + csv::format_real(gt_std[2]));
  }
  for (const auto& t : scatter) {
    const auto i = *grid.find(t);
    std::size_t zero = 0;
    const auto gs = green_std_of(table.per_tuple[i], &zero);
    const auto row = present_row(errors, static_cast<Eigen::Index>(i));
    out << t.ToString() << ": green_std=" << (gs ? csv::format_real(*gs) : "n/a")
        << " median=" << (row.empty() ? "n/a" : csv::format_real(summarize(row).median)) << '\n';
  }
  out << "difference pairs: " << pairs.size() << '\n';

  if (pairs.size() < 2) {
    finish(bundle, config, out);
    err << "error: fewer than two difference pairs; correlation undefined\n";
    return kDegenerateResult;
  }
  std::vector<double> xs, ys;
  for (const auto& p : pairs) {
    xs.push_back(p.delta_sigma);
    ys.push_back(p.delta_median);
  }
  const double r = pearson(xs, ys);
  bundle.metadata.emplace_back("pearson", csv::format_real(r));
  out << "pearson correlation: " << csv::format_real(r) << '\n';
  finish(bundle, config, out);
  return kSuccess;
}

int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream&) {
  if (config.out.empty()) throw std::invalid_argument("synth needs --out");
  if (config.synth_format != "png" && config.synth_format != "ppm") throw std::invalid_argument("--format must be png or ppm");
  SyntheticSpec spec = config.synth;
  spec.seed = config.seed;
  if (config.synth_bit_depth == 8) spec.white_level = 255.0;
  const auto scenes = synthesize_dataset(spec);

  const fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir / "images", ec);
  if (ec) throw DataError("cannot create '" + (dir / "images").string() + "'");

  std::vector<std::string> ids;
  for (const auto& s : scenes) ids.push_back(s.image_id);
  const FoldAssignment folds = round_robin_folds(ids, config.synth_folds);

  std::vector<DatasetRecord> records;
  const RasterFormat format = config.synth_format == "png" ? RasterFormat::kPng : RasterFormat::kPpm;
  for (const auto& s : scenes) {
    const fs::path relative = fs::path("images") / (s.image_id + "." + config.synth_format);
    save_image(dir / relative, s.image, format, config.synth_bit_depth);
    records.push_back({s.image_id, relative, std::nullopt, s.illuminant, folds.fold_of.at(s.image_id)});
  }
  save_manifest(dir / "manifest.csv", records);
  save_folds(dir / "folds.csv", folds);
  out << "wrote " << scenes.size() << " images and manifest.csv to " << dir.string() << '\n';
  return kSuccess;
}

void add_common(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--manifest", config.manifest, "Manifest CSV (image_id,image_path,mask_path,e_R,e_G,e_B,fold)");
  cmd->add_option("--out", config.out, "Output directory for the report bundle");
  cmd->add_option("--workers", config.workers, "Worker threads")->check(CLI::Range(1, 1024));
  cmd->add_option("--seed", config.seed, "Random seed");
  cmd->add_option("--saturation", config.saturation, "Exclude pixels with any channel >= this fraction of the white level")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--dark-level", config.dark_level, "Exclude pixels with every channel <= this level")->check(CLI::NonNegativeNumber);
  cmd->add_option("--white-level", config.white_level, "Override the white level implied by the file bit depth")
      ->check(CLI::PositiveNumber);
}

void add_grid(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--methods", config.methods, "Comma-separated method families to tune")->capture_default_str();
  cmd->add_option("--n-values", config.n_values, "Derivative orders of the grid (default 0,1,2)");
  cmd->add_option("--p-values", config.p_values, "Minkowski norms of the grid, 'inf' allowed (default 1..12,15,20,inf)");
  cmd->add_option("--sigma-values", config.sigma_values, "Smoothing scales of the grid (default 0,1,2,3,5,7,9)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"Statistics-based illumination estimation and tuning"};
  app.name("ccstat");
  app.require_subcommand(1);

  auto* estimate = app.add_subcommand("estimate", "Estimate the illuminant of every manifest image");
  add_common(estimate, config);
  estimate->add_option("--method", config.method,
                       "gray_world | white_patch | shades_of_gray | general_gray_world | gray_edge_1 | gray_edge_2");
  estimate->add_option("--p", config.p, "Minkowski norm for --method ('inf' allowed)");
  estimate->add_option("--sigma", config.sigma, "Smoothing scale for --method")->check(CLI::NonNegativeNumber);
  estimate->add_option("--params", config.params, "Explicit tuple, e.g. n=1,p=6,sigma=2");

  auto* tune = app.add_subcommand("tune", "Supervised tuning on the whole dataset");
  add_common(tune, config);
  add_grid(tune, config);

  auto* crossval = app.add_subcommand("crossval", "Cross-validated supervised tuning");
  add_common(crossval, config);
  add_grid(crossval, config);
  crossval->add_option("--folds", config.folds, "Fold CSV (image_id,fold); defaults to the manifest fold column");

  auto* greenstab = app.add_subcommand("greenstab", "Unsupervised green-stability tuning");
  add_common(greenstab, config);
  add_grid(greenstab, config);
  greenstab->add_option("--eval-manifest", config.eval_manifest, "Ground-truthed manifest to evaluate the chosen tuples on");
  greenstab->add_option("--folds", config.folds, "Tune on training folds and evaluate on each held-out fold");

  auto* analyze = app.add_subcommand("analyze", "Difference-pair correlation experiment and scatter data");
  add_common(analyze, config);
  add_grid(analyze, config);
  analyze->add_option("--scatter-params", config.scatter_params, "Tuples whose estimate chromaticities are emitted")
      ->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic Mondrian dataset with manifest");
  synth->add_option("--out", config.out, "Output directory")->required();
  synth->add_option("--seed", config.seed, "Random seed");
  synth->add_option("--count", config.synth.image_count, "Number of images")->check(CLI::PositiveNumber);
  synth->add_option("--width", config.synth.width, "Image width")->check(CLI::PositiveNumber);
  synth->add_option("--height", config.synth.height, "Image height")->check(CLI::PositiveNumber);
  synth->add_option("--min-patches", config.synth.min_patches, "Minimum reflectance patches");
  synth->add_option("--max-patches", config.synth.max_patches, "Maximum reflectance patches");
  synth->add_option("--noise", config.synth.noise, "Noise std as a fraction of the white level")->check(CLI::NonNegativeNumber);
  synth->add_option("--green-spread", config.synth.green_spread, "Illuminant green chromaticity std");
  synth->add_option("--red-blue-spread", config.synth.red_blue_spread, "Illuminant red/blue chromaticity spread");
  synth->add_option("--kfolds", config.synth_folds, "Number of folds in the manifest")->check(CLI::Range(2, 1000));
  synth->add_option("--format", config.synth_format, "png or ppm")->check(CLI::IsMember({"png", "ppm"}));
  synth->add_option("--bit-depth", config.synth_bit_depth, "8 or 16")->check(CLI::IsMember({8, 16}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const CLI::App* chosen = app.get_subcommands().front();
    config.command = chosen->get_name();
    if (!(config.saturation > 0)) throw std::invalid_argument("--saturation must lie in (0, 1]");
    if (config.command == "estimate") return cmd_estimate(config, out, err);
    if (config.command == "tune") return cmd_tune(config, out, err);
    if (config.command == "crossval") return cmd_crossval(config, out, err);
    if (config.command == "greenstab") return cmd_greenstab(config, out, err);
    if (config.command == "analyze") return cmd_analyze(config, out, err);
    return cmd_synth(config, out, err);
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const ZeroSignalError& e) {
    err << "degenerate result: " << e.what() << '\n';
    return kDegenerateResult;
  } catch (const DegenerateError& e) {
    err << "degenerate result: " << e.what() << '\n';
    return kDegenerateResult;
  }
}

}  // namespace ccstat::cli
