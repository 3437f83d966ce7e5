/*
 * Copyright 2026 The flight2vec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "flight2vec/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "flight2vec/errors.hpp"

namespace f2v {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

ParseResult parse_trajectory_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty input: header row missing");

  const std::vector<std::string> header = split_csv_line(line);
  std::map<std::string, int> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = static_cast<int>(i);

  const std::array<const char*, 8> mandatory = {"id", "t", "lon", "lat", "alt", "v_lon", "v_lat", "v_alt"};
  for (const char* name : mandatory) {
    if (!col.count(name)) throw SchemaError(std::string("missing mandatory column: ") + name);
  }
  const int id_col = col["id"];
  const bool has_label = col.count("label") > 0;
  const bool has_tag = col.count("anomaly_tag") > 0;

  ParseResult result;
  std::map<std::string, std::size_t> index_by_id;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() < header.size()) {
      result.row_issues.push_back({line_no, "row has fewer cells than header"});
      continue;
    }

    TrajectoryPoint p;
    bool ok = true;
    const std::array<std::pair<const char*, double*>, 7> numeric = {{
        {"t", &p.t}, {"lon", &p.lon}, {"lat", &p.lat}, {"alt", &p.alt},
        {"v_lon", &p.v_lon}, {"v_lat", &p.v_lat}, {"v_alt", &p.v_alt}}};
    for (const auto& [name, dst] : numeric) {
      const std::string& cell = cells[col[name]];
      double value = 0.0;
      if (!parse_double(cell, value)) {
        result.row_issues.push_back({line_no, std::string("unparseable numeric cell in column ") + name +
                                                  ": '" + trim(cell) + "'"});
        ok = false;
        break;
      }
      if (!std::isfinite(value)) {
        result.row_issues.push_back({line_no, std::string("non-finite value in column ") + name});
        ok = false;
        break;
      }
      *dst = value;
    }
    if (!ok) continue;

    const std::string id = trim(cells[id_col]);
    auto it = index_by_id.find(id);
    if (it == index_by_id.end()) {
      it = index_by_id.emplace(id, result.trajectories.size()).first;
      Trajectory t;
      t.id = id;
      result.trajectories.push_back(std::move(t));
    }
    Trajectory& traj = result.trajectories[it->second];
    if (has_label && traj.label.empty()) traj.label = trim(cells[col["label"]]);
    if (has_tag && traj.anomaly_tag.empty()) traj.anomaly_tag = trim(cells[col["anomaly_tag"]]);
    traj.points.push_back(p);
  }

  for (Trajectory& t : result.trajectories) {
    std::stable_sort(t.points.begin(), t.points.end(),
                     [](const TrajectoryPoint& a, const TrajectoryPoint& b) { return a.t < b.t; });
  }

  // Drop n < 2 trajectories, preserving first-appearance order of the rest.
  std::vector<Trajectory> kept;
  kept.reserve(result.trajectories.size());
  for (Trajectory& t : result.trajectories) {
    if (t.points.size() < 2) {
      result.dropped.push_back(t.id);
    } else {
      kept.push_back(std::move(t));
    }
  }
  result.trajectories = std::move(kept);
  return result;
}

ParseResult parse_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trajectory file: " + path);
  return parse_trajectory_table(in);
}

void serialize_trajectory_table(const std::vector<Trajectory>& trajs, std::ostream& out) {
  bool any_label = false, any_tag = false;
  for (const Trajectory& t : trajs) {
    any_label |= !t.label.empty();
    any_tag |= !t.anomaly_tag.empty();
  }
  out << "id,t,lon,lat,alt,v_lon,v_lat,v_alt";
  if (any_label) out << ",label";
  if (any_tag) out << ",anomaly_tag";
  out << "\n";
  for (const Trajectory& t : trajs) {
    for (const TrajectoryPoint& p : t.points) {
      out << t.id << ',' << format_value(p.t) << ',' << format_value(p.lon) << ','
          << format_value(p.lat) << ',' << format_value(p.alt) << ',' << format_value(p.v_lon)
          << ',' << format_value(p.v_lat) << ',' << format_value(p.v_alt);
      if (any_label) out << ',' << t.label;
      if (any_tag) out << ',' << t.anomaly_tag;
      out << "\n";
    }
  }
}

void write_trajectory_file(const std::vector<Trajectory>& trajs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trajectory file: " + path);
  serialize_trajectory_table(trajs, out);
}

ValidationReport validate_trajectory(const Trajectory& traj) {
  ValidationReport report;
  report.trajectory_id = traj.id;
  report.too_short = traj.points.size() < 2;
  for (const TrajectoryPoint& p : traj.points) {
    bool finite = true;
    for (int f = 0; f < kFeatureCount; ++f) finite &= std::isfinite(p.feature(f));
    finite &= std::isfinite(p.t);
    if (!finite) {
      ++report.non_finite;
      continue;  // range checks on non-finite values are meaningless
    }
    if (p.lon < -180.0 || p.lon > 180.0 || p.lat < -90.0 || p.lat > 90.0 || p.alt < 0.0) {
      ++report.out_of_range;
    }
  }
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    if (!(traj.points[i].t > traj.points[i - 1].t)) ++report.non_monotone_timestamps;
  }
  return report;
}

NormStats fit_norm_stats(const std::vector<Trajectory>& dataset) {
  std::size_t n = 0;
  for (const Trajectory& t : dataset) n += t.points.size();
  if (n == 0) throw PreconditionError("fit_norm_stats: empty dataset");

  NormStats stats;
  for (int f = 0; f < kFeatureCount; ++f) {
    double sum = 0.0;
    for (const Trajectory& t : dataset)
      for (const TrajectoryPoint& p : t.points) sum += p.feature(f);
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const Trajectory& t : dataset)
      for (const TrajectoryPoint& p : t.points) {
        const double d = p.feature(f) - mean;
        sq += d * d;
      }
    const double var = sq / static_cast<double>(n);
    if (var <= 0.0) {
      throw DegenerateFeatureError(std::string("zero-variance feature: ") + kFeatureNames[f]);
    }
    stats.mean[f] = mean;
    stats.std[f] = std::sqrt(var);
  }
  stats.fitted = true;
  return stats;
}

double normalize_feature(double value, int feature, const NormStats& stats) {
  return (value - stats.mean[feature]) / stats.std[feature];
}

double denormalize_feature(double value, int feature, const NormStats& stats) {
  return value * stats.std[feature] + stats.mean[feature];
}

Trajectory normalize(const Trajectory& traj, const NormStats& stats) {
  if (!stats.fitted) throw PreconditionError("normalize: stats not fitted");
  Trajectory out = traj;
  for (TrajectoryPoint& p : out.points) {
    for (int f = 0; f < kFeatureCount; ++f) p.set_feature(f, normalize_feature(p.feature(f), f, stats));
  }
  return out;
}

Trajectory denormalize(const Trajectory& traj, const NormStats& stats) {
  if (!stats.fitted) throw PreconditionError("denormalize: stats not fitted");
  Trajectory out = traj;
  for (TrajectoryPoint& p : out.points) {
    for (int f = 0; f < kFeatureCount; ++f) p.set_feature(f, denormalize_feature(p.feature(f), f, stats));
  }
  return out;
}

std::pair<std::vector<Trajectory>, std::vector<Trajectory>> split_by_time(
    const std::vector<Trajectory>& dataset, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw PreconditionError("split_by_time: fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dataset[a].start_time() != dataset[b].start_time())
      return dataset[a].start_time() < dataset[b].start_time();
    return dataset[a].id < dataset[b].id;
  });
  const std::size_t k = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(dataset.size())));
  std::pair<std::vector<Trajectory>, std::vector<Trajectory>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < k ? out.first : out.second).push_back(dataset[order[i]]);
  }
  return out;
}

}  // namespace f2v
