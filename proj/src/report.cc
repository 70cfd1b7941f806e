// Copyright 2026 The AdaDemo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "adademo/error.h"
#include "adademo/harness.h"

namespace adademo {
namespace {

constexpr char kMetricsHeader[] =
    "method,seed,round,task_id,success_rate,sr_stderr,new_demos,"
    "cumulative_demos";
// cumulative_demos_mean is the per-task mean (the x-axis of the curve);
// cumulative_demos_total is the suite-wide sum.
constexpr char kCurveHeader[] =
    "method,round,cumulative_demos_mean,cumulative_demos_total,mean_sr,"
    "sr_stderr";

std::string Num(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T ParseField(const std::string& s, int line) {
  T value{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), value);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ParseError("bad metrics field '" + s + "'", line);
  }
  return value;
}

}  // namespace

std::string MetricsCsv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const MetricsRow& r : rows) {
    out += r.method + "," + std::to_string(r.seed) + "," +
           std::to_string(r.round) + "," +
           (r.task_id == kAggregateTask ? std::string("all")
                                        : std::to_string(r.task_id)) +
           "," + Num(r.success_rate) + "," + Num(r.sr_stderr) + "," +
           std::to_string(r.new_demos) + "," +
           std::to_string(r.cumulative_demos) + "\n";
  }
  return out;
}

std::vector<MetricsRow> ParseMetricsCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1) {
      if (line != kMetricsHeader) throw ParseError("unexpected metrics header", 1);
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsv(line);
    if (f.size() != 8) throw ParseError("expected 8 fields", number);
    MetricsRow r;
    r.method = f[0];
    r.seed = ParseField<Seed>(f[1], number);
    r.round = ParseField<int>(f[2], number);
    r.task_id = f[3] == "all" ? kAggregateTask : ParseField<int>(f[3], number);
    r.success_rate = ParseField<double>(f[4], number);
    r.sr_stderr = ParseField<double>(f[5], number);
    r.new_demos = ParseField<long long>(f[6], number);
    r.cumulative_demos = ParseField<long long>(f[7], number);
    rows.push_back(std::move(r));
  }
  if (number == 0) throw ParseError("empty metrics file", 0);
  return rows;
}

std::vector<CurvePoint> ComputeCurve(const std::vector<MetricsRow>& rows) {
  struct Acc {
    std::vector<double> sr;
    std::vector<double> stderr_single;
    double demos_mean = 0.0;
    double demos_total = 0.0;
  };
  std::map<std::pair<std::string, int>, int> tasks_per_key;
  for (const MetricsRow& r : rows) {
    if (r.task_id != kAggregateTask) {
      tasks_per_key[{r.method + "#" + std::to_string(r.seed), r.round}]++;
    }
  }
  std::map<std::tuple<std::string, int>, Acc> groups;
  for (const MetricsRow& r : rows) {
    if (r.task_id != kAggregateTask) continue;
    const int m =
        tasks_per_key[{r.method + "#" + std::to_string(r.seed), r.round}];
    if (m == 0) throw StructuralError("aggregate row without task rows");
    Acc& a = groups[{r.method, r.round}];
    a.sr.push_back(r.success_rate);
    a.stderr_single.push_back(r.sr_stderr);
    a.demos_mean += static_cast<double>(r.cumulative_demos) / m;
    a.demos_total += static_cast<double>(r.cumulative_demos);
  }
  std::vector<CurvePoint> curve;
  for (const auto& [key, a] : groups) {
    const double n = static_cast<double>(a.sr.size());
    CurvePoint p;
    p.method = std::get<0>(key);
    p.round = std::get<1>(key);
    p.cumulative_demos_mean = a.demos_mean / n;
    p.cumulative_demos_total = a.demos_total / n;
    double mean = 0.0;
    for (double x : a.sr) mean += x;
    mean /= n;
    p.mean_sr = mean;
    if (a.sr.size() >= 2) {
      double ss = 0.0;
      for (double x : a.sr) ss += (x - mean) * (x - mean);
      p.sr_stderr = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    } else {
      p.sr_stderr = a.stderr_single.front();
    }
    curve.push_back(p);
  }
  return curve;
}

std::string CurveCsv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kCurveHeader) + "\n";
  for (const CurvePoint& p : ComputeCurve(rows)) {
    out += p.method + "," + std::to_string(p.round) + "," +
           Num(p.cumulative_demos_mean) + "," + Num(p.cumulative_demos_total) +
           "," + Num(p.mean_sr) + "," + Num(p.sr_stderr) + "\n";
  }
  return out;
}

void EmitReport(const std::vector<MetricsRow>& rows,
                const std::string& out_dir) {
  if (rows.empty()) throw UsageError("no metrics rows to report");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  auto write = [&](const char* name, const std::string& text) {
    const std::filesystem::path path = std::filesystem::path(out_dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed: " + path.string());
  };
  write("metrics.csv", MetricsCsv(rows));
  write("curve.csv", CurveCsv(rows));
}

}  // namespace adademo
