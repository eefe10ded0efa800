#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "kcorr/errors.hpp"
#include "kcorr/experiment/csv.hpp"

namespace kcorr::experiment {

/// Guards the relative difference where the classical complexity vanishes.
inline constexpr double kRelDiffEpsilon = 1e-9;

struct CorrespondenceReport {
  std::string label;
  /// |C^Q(t) - C^C(t)| / max(C^C(t), ε).
  std::vector<double> rel_diff;
  /// Mean of rel_diff over t = 0..t_i.
  std::vector<double> running_average;
  double average = 0.0;
  /// |x^Q_n - x^C_n| for the common n range.
  std::vector<double> da, db, dc;
};

inline CorrespondenceReport correspondence(const std::vector<double>& classical,
                                           const std::vector<double>& quantum, std::string label = {}) {
  if (classical.size() != quantum.size()) {
    throw ConfigError("complexity series lengths differ (" + std::to_string(classical.size()) + " vs " +
                      std::to_string(quantum.size()) + ")");
  }
  if (classical.empty()) throw ConfigError("empty complexity series");
  CorrespondenceReport r;
  r.label = std::move(label);
  double sum = 0.0;
  for (std::size_t t = 0; t < classical.size(); ++t) {
    const double d = std::abs(quantum[t] - classical[t]) / std::max(classical[t], kRelDiffEpsilon);
    r.rel_diff.push_back(d);
    sum += d;
    r.running_average.push_back(sum / static_cast<double>(t + 1));
  }
  r.average = sum / static_cast<double>(classical.size());
  return r;
}

/// Sequence columns of a run directory (real parts).
struct SequenceTable {
  std::vector<double> a, b, c;
};

inline SequenceTable read_sequences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot read " + path.string());
  SequenceTable s;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() < 4) throw StorageError("malformed row in " + path.string());
    s.a.push_back(std::stod(cells[1]));
    s.b.push_back(std::stod(cells[2]));
    s.c.push_back(std::stod(cells[3]));
  }
  return s;
}

inline void add_sequence_differences(CorrespondenceReport& r, const SequenceTable& cl, const SequenceTable& q) {
  const std::size_t n = std::min(cl.a.size(), q.a.size());
  for (std::size_t i = 0; i < n; ++i) {
    r.da.push_back(std::abs(q.a[i] - cl.a[i]));
    r.db.push_back(std::abs(q.b[i] - cl.b[i]));
    r.dc.push_back(std::abs(q.c[i] - cl.c[i]));
  }
}

inline std::vector<double> read_complexity(const std::filesystem::path& dir) {
  std::vector<double> t, c;
  read_two_columns(dir / "complexity.csv", t, c);
  return c;
}

/// Compares every quantum run directory against the classical one and writes
/// compare.csv (label, t, rel_diff), compare_avg.csv (label, avg) and
/// compare_sequences.csv (label, n, da, db, dc).
inline std::vector<CorrespondenceReport> compare_runs(const std::filesystem::path& classical_dir,
                                                      const std::vector<std::filesystem::path>& quantum_dirs,
                                                      const std::filesystem::path& out) {
  if (quantum_dirs.empty()) throw ConfigError("compare needs a classical run and at least one quantum run");
  const auto cl = read_complexity(classical_dir);
  const auto cl_seq = read_sequences(classical_dir / "sequences.csv");
  std::vector<CorrespondenceReport> reports;
  for (const auto& dir : quantum_dirs) {
    const std::string label = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    auto r = correspondence(cl, read_complexity(dir), label);
    add_sequence_differences(r, cl_seq, read_sequences(dir / "sequences.csv"));
    reports.push_back(std::move(r));
  }
  std::filesystem::create_directories(out);
  {
    CsvWriter w(out / "compare.csv", {"label", "t", "rel_diff"});
    for (const auto& r : reports) {
      for (std::size_t t = 0; t < r.rel_diff.size(); ++t) w.row({r.label, std::to_string(t), fmt(r.rel_diff[t])});
    }
  }
  {
    CsvWriter w(out / "compare_avg.csv", {"label", "avg"});
    for (const auto& r : reports) w.row({r.label, fmt(r.average)});
  }
  {
    CsvWriter w(out / "compare_sequences.csv", {"label", "n", "da", "db", "dc"});
    for (const auto& r : reports) {
      for (std::size_t n = 0; n < r.da.size(); ++n) {
        w.row({r.label, std::to_string(n), fmt(r.da[n]), fmt(r.db[n]), fmt(r.dc[n])});
      }
    }
  }
  return reports;
}

} // namespace kcorr::experiment
