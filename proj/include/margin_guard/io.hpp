#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "margin_guard/boundary.hpp"
#include "margin_guard/certainty.hpp"
#include "margin_guard/linear_model.hpp"
#include "margin_guard/threshold_search.hpp"
#include "margin_guard/version_space.hpp"

// File formats: dataset CSV in, explanation/pair/curve/difference CSV out,
// model weights as JSON. All numeric output goes through one fixed format so
// repeated runs are byte-identical.

namespace margin_guard {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct Dataset {
  Eigen::MatrixXd points;
  Eigen::VectorXi labels;            // in {-1, +1} after mapping
  std::vector<std::string> groups;   // empty when no group column
  std::vector<std::string> feature_names;

  bool has_groups() const { return !groups.empty(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::domain_error("CSV parse error (" + context + "): '" + s + "'");
  }
}

}  // namespace detail

// Header row required. Columns: numeric features (any names), a `label`
// column in {-1,+1} or {0,1} (0 maps to -1), optionally a `group` column.
inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("read_dataset_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::domain_error("read_dataset_csv: empty file " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  int label_col = -1, group_col = -1;
  std::vector<int> feature_cols;
  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "label") {
      label_col = static_cast<int>(c);
    } else if (header[c] == "group") {
      group_col = static_cast<int>(c);
    } else {
      feature_cols.push_back(static_cast<int>(c));
      ds.feature_names.push_back(header[c]);
    }
  }
  if (label_col < 0) {
    throw std::domain_error("read_dataset_csv: no `label` column in " + path);
  }
  if (feature_cols.empty()) {
    throw std::domain_error("read_dataset_csv: no feature columns in " + path);
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::string> groups;
  bool saw_zero = false, saw_minus = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::domain_error("read_dataset_csv: ragged row in " + path);
    }
    std::vector<double> row;
    row.reserve(feature_cols.size());
    for (int c : feature_cols) {
      row.push_back(detail::parse_double(fields[c], "feature"));
    }
    const double raw = detail::parse_double(fields[label_col], "label");
    int label;
    if (raw == 1.0) {
      label = +1;
    } else if (raw == 0.0) {
      label = 0;  // resolved below once the scheme is known
      saw_zero = true;
    } else if (raw == -1.0) {
      label = -1;
      saw_minus = true;
    } else {
      throw std::domain_error("read_dataset_csv: label must be -1/0/1");
    }
    rows.push_back(std::move(row));
    labels.push_back(label);
    if (group_col >= 0) groups.push_back(fields[group_col]);
  }
  if (saw_zero && saw_minus) {
    throw std::domain_error(
        "read_dataset_csv: labels mix {-1,+1} and {0,1} schemes");
  }
  ds.points.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(feature_cols.size()));
  ds.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      ds.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
    ds.labels[static_cast<Eigen::Index>(i)] = labels[i] == 0 ? -1 : labels[i];
  }
  ds.groups = std::move(groups);
  return ds;
}

// Explanation CSV: f1..fd, label, margin.
inline void write_explanations_csv(const std::string& path,
                                   const ExplanationSet& expl) {
  std::ofstream out(path);
  if (!out) throw std::domain_error("write_explanations_csv: cannot open " + path);
  const Eigen::Index d = expl.points.cols();
  for (Eigen::Index j = 0; j < d; ++j) out << "f" << (j + 1) << ",";
  out << "label,margin\n";
  for (Eigen::Index i = 0; i < expl.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out << fmt_double(expl.points(i, j)) << ",";
    }
    out << expl.labels[i] << "," << fmt_double(expl.margins[i]) << "\n";
  }
}

inline ExplanationSet read_explanations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("read_explanations_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::domain_error("read_explanations_csv: empty file " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header[header.size() - 2] != "label" ||
      header.back() != "margin") {
    throw std::domain_error(
        "read_explanations_csv: expected f1..fd,label,margin header");
  }
  const std::size_t d = header.size() - 2;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<double> margins;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::domain_error("read_explanations_csv: ragged row");
    }
    std::vector<double> row;
    for (std::size_t j = 0; j < d; ++j) {
      row.push_back(detail::parse_double(fields[j], "feature"));
    }
    labels.push_back(
        static_cast<int>(detail::parse_double(fields[d], "label")));
    margins.push_back(detail::parse_double(fields[d + 1], "margin"));
    rows.push_back(std::move(row));
  }
  ExplanationSet e;
  e.points.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(d));
  e.labels.resize(static_cast<Eigen::Index>(rows.size()));
  e.margins.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      e.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
    e.labels[static_cast<Eigen::Index>(i)] = labels[i];
    e.margins[static_cast<Eigen::Index>(i)] = margins[i];
  }
  return e;
}

// Pair CSV: i, j, dist, margin_i, margin_j.
inline void write_pairs_csv(const std::string& path,
                            const BoundaryPairSet& pairs,
                            const Eigen::MatrixXd& points,
                            const LinearModel& model) {
  std::ofstream out(path);
  if (!out) throw std::domain_error("write_pairs_csv: cannot open " + path);
  out << "i,j,dist,margin_i,margin_j\n";
  for (const auto& [i, j] : pairs.pairs) {
    const double dist = (points.row(i) - points.row(j)).norm();
    out << i << "," << j << "," << fmt_double(dist) << ","
        << fmt_double(model.decision(points.row(i).transpose())) << ","
        << fmt_double(model.decision(points.row(j).transpose())) << "\n";
  }
}

// Curve CSV: percentile, value, stddev, metric, r, repeats. Missing grid
// points carry NA.
inline void write_curve_csv(const std::string& path,
                            const CertaintyCurve& curve) {
  std::ofstream out(path);
  if (!out) throw std::domain_error("write_curve_csv: cannot open " + path);
  out << "percentile,value,stddev,metric,r,repeats\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out << fmt_double(curve.grid[i]) << ",";
    if (std::isfinite(curve.values[i])) {
      out << fmt_double(curve.values[i]) << "," << fmt_double(curve.stddevs[i]);
    } else {
      out << "NA,NA";
    }
    out << "," << curve.metric_name << "," << fmt_double(curve.r) << ","
        << curve.repeats << "\n";
  }
}

inline CertaintyCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("read_curve_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::domain_error("read_curve_csv: empty file " + path);
  }
  CertaintyCurve c;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 6) throw std::domain_error("read_curve_csv: bad row");
    c.grid.push_back(detail::parse_double(fields[0], "percentile"));
    if (fields[1] == "NA") {
      c.values.push_back(std::numeric_limits<double>::quiet_NaN());
      c.stddevs.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      c.values.push_back(detail::parse_double(fields[1], "value"));
      c.stddevs.push_back(detail::parse_double(fields[2], "stddev"));
    }
    c.metric_name = fields[3];
    c.r = detail::parse_double(fields[4], "r");
    c.repeats = static_cast<int>(detail::parse_double(fields[5], "repeats"));
  }
  return c;
}

// Difference-table CSV: target, binary, optimal, difference; NA marks
// not-achievable entries.
inline void write_difference_csv(const std::string& path,
                                 const std::vector<DifferenceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::domain_error("write_difference_csv: cannot open " + path);
  out << "target,binary,optimal,difference\n";
  auto cell = [](const std::optional<double>& v) {
    return v ? fmt_double(*v) : std::string("NA");
  };
  for (const auto& row : rows) {
    out << fmt_double(row.target) << "," << cell(row.binary) << ","
        << cell(row.optimal) << "," << cell(row.difference) << "\n";
  }
}

nlohmann::json certainty_report_to_json(const CertaintyReport& rep);

// Report JSON: summary metrics plus the per-pair estimates.
inline nlohmann::json certainty_report_to_json(const CertaintyReport& rep) {
  nlohmann::json j;
  j["n_samples"] = rep.n_samples;
  j["max_pi"] = rep.max_pi;
  j["top5_mean"] = rep.top5_mean;
  j["mean_pi"] = rep.mean_pi;
  j["stderr_bound"] = rep.stderr_bound;
  j["per_pair"] = nlohmann::json::array();
  for (const auto& pc : rep.per_pair) {
    j["per_pair"].push_back({{"pair", pc.pair_index}, {"pi_hat", pc.pi_hat}});
  }
  return j;
}

inline void write_certainty_report_json(const std::string& path,
                                        const CertaintyReport& rep) {
  std::ofstream out(path);
  if (!out) {
    throw std::domain_error("write_certainty_report_json: cannot open " + path);
  }
  out << certainty_report_to_json(rep).dump(2) << "\n";
}

// Flat per-pair CSV: pair, pi_hat.
inline void write_certainty_report_csv(const std::string& path,
                                       const CertaintyReport& rep) {
  std::ofstream out(path);
  if (!out) {
    throw std::domain_error("write_certainty_report_csv: cannot open " + path);
  }
  out << "pair,pi_hat\n";
  for (const auto& pc : rep.per_pair) {
    out << pc.pair_index << "," << fmt_double(pc.pi_hat) << "\n";
  }
}

// Model weights JSON: {"w": [...], "b": 0.0}.
inline void write_model_json(const std::string& path,
                             const LinearModel& model) {
  nlohmann::json j;
  j["w"] = std::vector<double>(model.w.data(), model.w.data() + model.w.size());
  j["b"] = model.b;
  std::ofstream out(path);
  if (!out) throw std::domain_error("write_model_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

inline LinearModel read_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("read_model_json: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::domain_error("read_model_json: " + std::string(e.what()));
  }
  if (!j.contains("w") || !j["w"].is_array()) {
    throw std::domain_error("read_model_json: missing `w` array");
  }
  LinearModel m;
  const auto& arr = j["w"];
  m.w.resize(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    m.w[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  m.b = j.value("b", 0.0);
  return m;
}

}  // namespace margin_guard
