#include "mfd/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "mfd/errors.hpp"

namespace mfd {
namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string cell(const MetricSummary& m, int seeds, std::optional<double> change) {
  std::string s = fixed2(m.mean);
  if (seeds > 1) s += " +-" + fixed2(m.std);
  if (change) {
    const char* arrow = *change > 0.0 ? "↑" : (*change < 0.0 ? "↓" : "=");
    s += " (" + fixed2(std::abs(*change)) + " " + arrow + ")";
  }
  return s;
}

// Display width: UTF-8 continuation bytes take no column.
std::size_t width(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t w) {
  const std::size_t n = width(s);
  return n >= w ? s : s + std::string(w - n, ' ');
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_number(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": not a number: '" + s + "'");
  }
}

}  // namespace

double relative_change(double value, double teacher) {
  if (teacher == 0.0) throw DomainError("relative_change: teacher value is zero");
  return 100.0 * (value - teacher) / teacher;
}

std::vector<ResultRow> aggregate_runs(const std::vector<RunRecord>& runs) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunRecord*>> by_method;
  for (const auto& r : runs) {
    if (!by_method.contains(r.method)) order.push_back(r.method);
    by_method[r.method].push_back(&r);
  }
  std::vector<ResultRow> rows;
  for (const auto& m : order) {
    std::vector<double> acc, da, dm;
    for (const RunRecord* r : by_method[m]) {
      acc.push_back(r->accuracy);
      da.push_back(r->deo_a);
      dm.push_back(r->deo_m);
    }
    ResultRow row;
    row.method = m;
    row.seed_count = static_cast<int>(acc.size());
    row.accuracy = summarize(acc);
    row.deo_a = summarize(da);
    row.deo_m = summarize(dm);
    rows.push_back(std::move(row));
  }
  return rows;
}

ComparisonTable build_comparison(std::vector<ResultRow> rows, const std::string& teacher_tag) {
  const auto it = std::find_if(rows.begin(), rows.end(),
                               [&](const ResultRow& r) { return upper(r.method) == upper(teacher_tag); });
  if (it == rows.end()) throw UsageError("report: no teacher baseline row '" + teacher_tag + "'");
  std::rotate(rows.begin(), it, it + 1);
  const ResultRow teacher = rows.front();
  for (auto& r : rows) {
    r.rel_accuracy = relative_change(r.accuracy.mean, teacher.accuracy.mean);
    r.rel_deo_a = relative_change(r.deo_a.mean, teacher.deo_a.mean);
    r.rel_deo_m = relative_change(r.deo_m.mean, teacher.deo_m.mean);
  }
  return ComparisonTable{std::move(rows)};
}

std::string ComparisonTable::to_text() const {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Model", "Accuracy (↑)", "DEO_A (↓)", "DEO_M (↓)"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    auto change = [&](double c) { return i == 0 ? std::nullopt : std::optional<double>(c); };
    cells.push_back({r.method, cell(r.accuracy, r.seed_count, change(r.rel_accuracy)),
                     cell(r.deo_a, r.seed_count, change(r.rel_deo_a)),
                     cell(r.deo_m, r.seed_count, change(r.rel_deo_m))});
  }
  std::vector<std::size_t> w(4, 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < 4; ++c) w[c] = std::max(w[c], width(line[c]));
  }
  std::string out;
  for (std::size_t l = 0; l < cells.size(); ++l) {
    for (std::size_t c = 0; c < 4; ++c) {
      out += c == 0 ? "" : " | ";
      out += c == 3 ? cells[l][c] : pad(cells[l][c], w[c]);
    }
    out += "\n";
    if (l == 0) {
      std::size_t total = 0;
      for (auto x : w) total += x;
      out += std::string(total + 9, '-') + "\n";
    }
  }
  return out;
}

std::string ComparisonTable::to_csv() const {
  std::string out =
      "method,seeds,accuracy,accuracy_std,deo_a,deo_a_std,deo_m,deo_m_std,"
      "rel_accuracy,rel_deo_a,rel_deo_m\n";
  char line[512];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%s,%d,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.2f,%.2f,%.2f\n",
                  r.method.c_str(), r.seed_count, r.accuracy.mean, r.accuracy.std, r.deo_a.mean,
                  r.deo_a.std, r.deo_m.mean, r.deo_m.std, r.rel_accuracy, r.rel_deo_a, r.rel_deo_m);
    out += line;
  }
  return out;
}

std::vector<RunRecord> read_run_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
      RunRecord r;
      r.method = j.at("method").get<std::string>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.accuracy = j.at("accuracy").get<double>();
      r.deo_a = j.at("deo_a").get<double>();
      r.deo_m = j.at("deo_m").get<double>();
      return {r};
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }

  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line)) throw FormatError(path.string() + ": empty file");
  const auto header = split_csv(line);
  const bool with_seed = header == std::vector<std::string>{"method", "seed", "accuracy", "deo_a", "deo_m"};
  const bool summary = header == std::vector<std::string>{"method", "accuracy", "deo_a", "deo_m"};
  if (!with_seed && !summary) throw FormatError(path.string() + ": unrecognised header '" + line + "'");
  std::vector<RunRecord> out;
  while (std::getline(lines, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) throw FormatError(path.string() + ": wrong field count in '" + line + "'");
    RunRecord r;
    r.method = f[0];
    std::size_t k = 1;
    if (with_seed) r.seed = static_cast<std::uint64_t>(to_number(f[k++], path));
    r.accuracy = to_number(f[k++], path);
    r.deo_a = to_number(f[k++], path);
    r.deo_m = to_number(f[k++], path);
    out.push_back(r);
  }
  return out;
}

std::string run_records_csv(const std::vector<RunRecord>& runs) {
  std::string out = "method,seed,accuracy,deo_a,deo_m\n";
  char line[256];
  for (const auto& r : runs) {
    std::snprintf(line, sizeof line, "%s,%llu,%.17g,%.17g,%.17g\n", r.method.c_str(),
                  static_cast<unsigned long long>(r.seed), r.accuracy, r.deo_a, r.deo_m);
    out += line;
  }
  return out;
}

}  // namespace mfd
