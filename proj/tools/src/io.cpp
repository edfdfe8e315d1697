#include "mahal/experiments.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace mahal::experiments {
namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, const std::string& path, std::size_t line) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  detail::require(!cell.empty() && end == begin + cell.size() && errno != ERANGE,
                  ErrorCode::data_error,
                  path + ":" + std::to_string(line) + ": '" + cell + "' is not a number");
  detail::require(std::isfinite(v), ErrorCode::data_error,
                  path + ":" + std::to_string(line) + ": non-finite value");
  return v;
}

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
  std::ifstream in(path);
  detail::require(in.good(), ErrorCode::data_error, "cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  detail::require(!rows.empty(), ErrorCode::data_error, "'" + path + "' is empty");
  return rows;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  detail::require(out.good(), ErrorCode::data_error, "cannot write '" + path + "'");
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

nlohmann::json ExperimentReport::to_json() const {
  json aggregates_json = json::object();
  for (const auto& [k, v] : aggregates) aggregates_json[k] = number_or_null(v);
  json trials_json = json::array();
  for (const auto& t : trials) {
    json row = json::object();
    for (const auto& [k, v] : t) row[k] = number_or_null(v);
    trials_json.push_back(std::move(row));
  }
  json series_json = json::object();
  for (const auto& s : series) series_json[s.name] = series_file(s);
  return json{{"schema_version", kSchemaVersion},
              {"experiment", experiments::to_string(config.experiment)},
              {"version", kVersion},
              {"seed", config.seed},
              {"config_hash", config_hash(config)},
              {"config", experiments::to_json(config)},
              {"aggregates", std::move(aggregates_json)},
              {"trials", std::move(trials_json)},
              {"series", std::move(series_json)},
              {"notes", notes}};
}

std::string ExperimentReport::report_file() const {
  return std::string(experiments::to_string(config.experiment)) + "_report.json";
}

std::string ExperimentReport::series_file(const Series& s) const {
  return std::string(experiments::to_string(config.experiment)) + "_" + s.name + ".csv";
}

std::string write_report(const ExperimentReport& report, const std::string& directory) {
  const std::filesystem::path dir(directory.empty() ? std::string(".") : directory);
  for (const auto& s : report.series) write_series_csv(s, (dir / report.series_file(s)).string());
  const std::string path = (dir / report.report_file()).string();
  auto out = open_out(path);
  out << report.to_json().dump(2) << '\n';
  return path;
}

void write_series_csv(const Series& s, const std::string& path) {
  detail::require(s.headers.size() == s.columns.size(), ErrorCode::dimension_mismatch,
                  "series '" + s.name + "': one column per header required");
  for (const auto& c : s.columns)
    detail::require(c.size() == s.rows(), ErrorCode::dimension_mismatch,
                    "series '" + s.name + "': ragged columns");
  auto out = open_out(path);
  for (std::size_t h = 0; h < s.headers.size(); ++h) out << (h ? "," : "") << s.headers[h];
  out << '\n';
  for (std::size_t r = 0; r < s.rows(); ++r) {
    for (std::size_t c = 0; c < s.columns.size(); ++c)
      out << (c ? "," : "") << format_double(s.columns[c][r]);
    out << '\n';
  }
}

Series read_series_csv(const std::string& path) {
  const auto rows = read_rows(path);
  Series s;
  s.name = std::filesystem::path(path).stem().string();
  s.headers = rows.front();
  s.columns.assign(s.headers.size(), {});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    detail::require(rows[r].size() == s.headers.size(), ErrorCode::data_error,
                    path + ":" + std::to_string(r + 1) + ": wrong number of fields");
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      s.columns[c].push_back(parse_number(rows[r][c], path, r + 1));
  }
  return s;
}

LabeledMatrix read_matrix_csv(const std::string& path) {
  const auto rows = read_rows(path);
  LabeledMatrix out;
  const auto& header = rows.front();
  detail::require(header.size() >= 2, ErrorCode::data_error,
                  path + ": header needs an id column and at least one sample column");
  out.col_ids.assign(header.begin() + 1, header.end());
  detail::require(rows.size() >= 2, ErrorCode::data_error, path + ": no data rows");
  out.values.resize(static_cast<Index>(rows.size() - 1), static_cast<Index>(out.col_ids.size()));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    detail::require(rows[r].size() == header.size(), ErrorCode::data_error,
                    path + ":" + std::to_string(r + 1) + ": wrong number of fields");
    out.row_ids.push_back(rows[r][0]);
    for (std::size_t c = 1; c < rows[r].size(); ++c)
      out.values(static_cast<Index>(r - 1), static_cast<Index>(c - 1)) =
          parse_number(rows[r][c], path, r + 1);
  }
  return out;
}

void write_matrix_csv(const LabeledMatrix& data, const std::string& path) {
  detail::require(static_cast<Index>(data.row_ids.size()) == data.values.rows() &&
                      static_cast<Index>(data.col_ids.size()) == data.values.cols(),
                  ErrorCode::dimension_mismatch, "write_matrix_csv: ids do not match the matrix");
  auto out = open_out(path);
  out << "id";
  for (const auto& c : data.col_ids) out << ',' << c;
  out << '\n';
  for (Index i = 0; i < data.values.rows(); ++i) {
    out << data.row_ids[static_cast<std::size_t>(i)];
    for (Index j = 0; j < data.values.cols(); ++j) out << ',' << format_double(data.values(i, j));
    out << '\n';
  }
}

SurvivalTable read_survival_csv(const std::string& path) {
  const auto rows = read_rows(path);
  const auto& header = rows.front();
  auto column = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    detail::require(it != header.end(), ErrorCode::data_error,
                    path + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ci = column("id"), ct = column("time"), ce = column("event");
  SurvivalTable t;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    detail::require(rows[r].size() == header.size(), ErrorCode::data_error,
                    path + ":" + std::to_string(r + 1) + ": wrong number of fields");
    t.ids.push_back(rows[r][ci]);
    const double time = parse_number(rows[r][ct], path, r + 1);
    detail::require(time >= 0.0, ErrorCode::data_error,
                    path + ":" + std::to_string(r + 1) + ": negative time");
    t.times.push_back(time);
    const std::string& e = rows[r][ce];
    detail::require(e == "0" || e == "1", ErrorCode::data_error,
                    path + ":" + std::to_string(r + 1) + ": event must be 0 or 1");
    t.events.push_back(e == "1");
  }
  return t;
}

void write_survival_csv(const SurvivalTable& t, const std::string& path) {
  auto out = open_out(path);
  out << "id,time,event\n";
  for (std::size_t i = 0; i < t.ids.size(); ++i)
    out << t.ids[i] << ',' << format_double(t.times[i]) << ',' << (t.events[i] ? 1 : 0) << '\n';
}

std::vector<SurvivalRecord> match_survival(const SurvivalTable& table,
                                           const std::vector<std::string>& subject_ids) {
  std::map<std::string, std::size_t> index;
  std::vector<std::string> duplicates;
  for (std::size_t i = 0; i < table.ids.size(); ++i)
    if (!index.emplace(table.ids[i], i).second) duplicates.push_back(table.ids[i]);
  std::vector<std::string> missing;
  std::set<std::string> wanted(subject_ids.begin(), subject_ids.end());
  for (const auto& id : subject_ids)
    if (!index.count(id)) missing.push_back(id);
  std::vector<std::string> extra;
  for (const auto& id : table.ids)
    if (!wanted.count(id)) extra.push_back(id);
  if (!missing.empty() || !extra.empty() || !duplicates.empty()) {
    std::string msg = "survival ids do not match expression subjects;";
    auto list = [&](const char* label, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg += std::string(" ") + label + ":";
      for (const auto& id : ids) msg += " " + id;
      msg += ";";
    };
    list("missing from survival", missing);
    list("not in expression", extra);
    list("duplicated", duplicates);
    detail::fail(ErrorCode::data_error, msg);
  }
  std::vector<SurvivalRecord> out;
  for (const auto& id : subject_ids) {
    const std::size_t i = index.at(id);
    out.push_back(SurvivalRecord{table.times[i], table.events[i], 0});
  }
  return out;
}

std::vector<Index> top_variance_rows(const Matrix& values, Index count) {
  detail::require(values.cols() >= 2, ErrorCode::insufficient_samples,
                  "top_variance_rows: need at least 2 columns");
  const Index m = values.rows();
  count = std::min(count, m);
  const Vector mean = values.rowwise().mean();
  const Vector var = (values.colwise() - mean).rowwise().squaredNorm();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return var(a) > var(b); });
  order.resize(static_cast<std::size_t>(count));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace mahal::experiments
