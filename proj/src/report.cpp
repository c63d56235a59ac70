#include "ccstat/report.hpp"

#include <fstream>

#include "ccstat/csv.hpp"
#include "ccstat/error.hpp"

#ifndef CCSTAT_VERSION
#define CCSTAT_VERSION "0.0.0"
#endif

namespace ccstat {

namespace {

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::trunc) {
    if (!out_) throw DataError("cannot write '" + path.string() + "'");
  }
  void Row(const std::vector<std::string>& cells) { out_ << csv::join(cells) << '\n'; }
  void Close() {
    out_.close();
    if (!out_) throw DataError("cannot write '" + path_.string() + "'");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = csv::strip_cr(line);
    if (!line.empty()) rows.push_back(csv::split(line));
  }
  return rows;
}

}  // namespace

std::string software_version() { return CCSTAT_VERSION; }

void write_results(const ReportBundle& bundle, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw DataError("cannot create '" + directory.string() + "': " + ec.message());

  {
    std::ofstream meta(directory / "run.txt", std::ios::trunc);
    if (!meta) throw DataError("cannot write run metadata in '" + directory.string() + "'");
    meta << "software_version=" << software_version() << '\n';
    for (const auto& [key, value] : bundle.metadata) meta << key << '=' << value << '\n';
    meta << "summary=" << (bundle.summaries.empty() ? "absent" : "present") << '\n';
    if (!meta) throw DataError("cannot write run metadata in '" + directory.string() + "'");
  }

  if (bundle.errors) {
    const ErrorMatrix& m = *bundle.errors;
    if (static_cast<std::size_t>(m.errors.rows()) != bundle.error_tuples.size())
      throw std::invalid_argument("error matrix rows must match error_tuples");
    CsvWriter out(directory / "errors.csv");
    std::vector<std::string> header = {"image_id"};
    for (const auto& t : bundle.error_tuples) header.push_back(t.ToString());
    out.Row(header);
    for (Eigen::Index j = 0; j < m.errors.cols(); ++j) {
      std::vector<std::string> row = {m.image_ids[static_cast<std::size_t>(j)]};
      for (Eigen::Index i = 0; i < m.errors.rows(); ++i) row.push_back(csv::format_real(m.errors(i, j)));
      out.Row(row);
    }
    out.Close();
  }

  {
    CsvWriter out(directory / "summary.csv");
    out.Row(csv::split("label," + ErrorSummary::CsvHeader()));
    for (const auto& [label, s] : bundle.summaries) {
      std::vector<std::string> row = {label};
      for (auto& cell : csv::split(s.ToCsvRow())) row.push_back(cell);
      out.Row(row);
    }
    out.Close();
  }

  if (!bundle.tuning.empty()) {
    CsvWriter out(directory / "tuning.csv");
    out.Row({"label", "tuple", "criterion", "zero_signal_count", "chosen"});
    for (const auto& [label, result] : bundle.tuning) {
      for (const auto& entry : result.per_tuple_log) {
        out.Row({label, entry.tuple.ToString(), entry.criterion ? csv::format_real(*entry.criterion) : "",
                 std::to_string(entry.zero_signal_count), entry.tuple == result.chosen ? "1" : "0"});
      }
    }
    out.Close();
  }

  if (!bundle.pairs.empty()) {
    CsvWriter out(directory / "pairs.csv");
    out.Row({"delta_sigma", "delta_median"});
    for (const auto& p : bundle.pairs) out.Row({csv::format_real(p.delta_sigma), csv::format_real(p.delta_median)});
    out.Close();
  }

  for (const auto& table : bundle.tables) {
    CsvWriter out(directory / table.file_name);
    out.Row(table.header);
    for (const auto& row : table.rows) out.Row(row);
    out.Close();
  }
}

ReportBundle read_results(const std::filesystem::path& directory) {
  ReportBundle bundle;
  {
    std::ifstream meta(directory / "run.txt");
    if (!meta) throw DataError("no run metadata in '" + directory.string() + "'");
    std::string line;
    while (std::getline(meta, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(0, eq);
      if (key == "software_version" || key == "summary") continue;
      bundle.metadata.emplace_back(key, line.substr(eq + 1));
    }
  }

  if (std::filesystem::exists(directory / "errors.csv")) {
    const auto rows = read_csv(directory / "errors.csv");
    if (rows.empty()) throw DataError("errors.csv is empty");
    for (std::size_t c = 1; c < rows[0].size(); ++c) bundle.error_tuples.push_back(ParameterTuple::Parse(rows[0][c]));
    ErrorMatrix m;
    m.errors.resize(static_cast<Eigen::Index>(bundle.error_tuples.size()), static_cast<Eigen::Index>(rows.size() - 1));
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size()) throw DataError("errors.csv row " + std::to_string(r + 1) + " has wrong width");
      m.image_ids.push_back(rows[r][0]);
      for (std::size_t c = 1; c < rows[r].size(); ++c)
        m.errors(static_cast<Eigen::Index>(c - 1), static_cast<Eigen::Index>(r - 1)) = csv::parse_real(rows[r][c]);
    }
    bundle.errors = std::move(m);
  }

  const auto summary_rows = read_csv(directory / "summary.csv");
  for (std::size_t r = 1; r < summary_rows.size(); ++r) {
    const auto& row = summary_rows[r];
    if (row.size() != 8) throw DataError("summary.csv row " + std::to_string(r + 1) + " has wrong width");
    ErrorSummary s;
    s.count = static_cast<std::size_t>(csv::parse_real(row[1]));
    s.mean = csv::parse_real(row[2]);
    s.median = csv::parse_real(row[3]);
    s.trimean = csv::parse_real(row[4]);
    s.best25 = csv::parse_real(row[5]);
    s.worst25 = csv::parse_real(row[6]);
    s.avg = csv::parse_real(row[7]);
    bundle.summaries.emplace_back(row[0], s);
  }

  if (std::filesystem::exists(directory / "pairs.csv")) {
    const auto rows = read_csv(directory / "pairs.csv");
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != 2) throw DataError("pairs.csv row " + std::to_string(r + 1) + " has wrong width");
      bundle.pairs.push_back({csv::parse_real(rows[r][0]), csv::parse_real(rows[r][1])});
    }
  }
  return bundle;
}

}  // namespace ccstat
