#ifndef VINET_FEATURES_HPP
#define VINET_FEATURES_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vinet/errors.hpp"
#include "vinet/poly.hpp"
#include "vinet/rng.hpp"

namespace vinet::features {

// A labeled point cloud.  `split` is empty when the source had no split
// column, otherwise one tag per row.
struct Dataset {
  PointSet points;
  std::vector<int> labels;
  std::vector<std::string> split;

  int rows() const { return static_cast<int>(points.rows()); }
  int dims() const { return static_cast<int>(points.cols()); }
  bool has_split() const { return !split.empty(); }

  int classes() const {
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    return k;
  }

  Dataset subset_by_split(const std::string& tag) const {
    if (!has_split()) throw DataError("dataset has no split column");
    std::vector<int> keep;
    for (size_t i = 0; i < split.size(); ++i)
      if (split[i] == tag) keep.push_back(static_cast<int>(i));
    return select(keep, /*keep_split=*/false);
  }

  Dataset subset_by_label(int k) const {
    std::vector<int> keep;
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == k) keep.push_back(static_cast<int>(i));
    return select(keep, has_split());
  }

  Dataset select(const std::vector<int>& idx, bool keep_split) const {
    Dataset out;
    out.points.resize(idx.size(), points.cols());
    out.labels.reserve(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
      out.points.row(i) = points.row(idx[i]);
      out.labels.push_back(labels[idx[i]]);
      if (keep_split) out.split.push_back(split[idx[i]]);
    }
    return out;
  }
};

struct LoadOptions {
  char delimiter = ',';
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace detail

// Delimited text with a header of f0..f{D-1}, an integer `label` column and
// an optional `split` column.  Parse failures name the row and column.
inline Dataset load_dataset(const std::string& path, const LoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  auto header = detail::split_line(line, opts.delimiter);

  std::vector<int> feature_cols;  // feature_cols[j] = column index of f{j}
  int label_col = -1, split_col = -1;
  for (size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "label") {
      label_col = static_cast<int>(c);
    } else if (name == "split") {
      split_col = static_cast<int>(c);
    } else if (name.size() > 1 && name[0] == 'f') {
      int j = -1;
      auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), j);
      if (ec == std::errc() && p == name.data() + name.size() && j >= 0) {
        if (j >= static_cast<int>(feature_cols.size())) feature_cols.resize(j + 1, -1);
        feature_cols[j] = static_cast<int>(c);
      } else {
        throw DataError(path + ": unrecognized column '" + name + "'");
      }
    } else {
      throw DataError(path + ": unrecognized column '" + name + "'");
    }
  }
  if (label_col < 0) throw DataError(path + ": missing 'label' column");
  if (feature_cols.empty()) throw DataError(path + ": no feature columns f0..");
  for (size_t j = 0; j < feature_cols.size(); ++j)
    if (feature_cols[j] < 0)
      throw DataError(path + ": feature columns must be contiguous; f" +
                      std::to_string(j) + " is missing");

  const int dims = static_cast<int>(feature_cols.size());
  std::vector<double> values;
  std::vector<int> labels;
  std::vector<std::string> splits;
  int row = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = detail::split_line(line, opts.delimiter);
    if (cells.size() != header.size())
      throw DataError(path + ": row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    for (int j = 0; j < dims; ++j) {
      const std::string& cell = cells[feature_cols[j]];
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size())
        throw DataError(path + ": row " + std::to_string(row) + ", column f" +
                        std::to_string(j) + ": not a number: '" + cell + "'");
      values.push_back(v);
    }
    const std::string& lc = cells[label_col];
    int label = -1;
    auto [p, ec] = std::from_chars(lc.data(), lc.data() + lc.size(), label);
    if (ec != std::errc() || p != lc.data() + lc.size() || label < 0)
      throw DataError(path + ": row " + std::to_string(row) +
                      ", column label: expected a nonnegative integer, got '" + lc + "'");
    labels.push_back(label);
    if (split_col >= 0) splits.push_back(cells[split_col]);
  }
  if (labels.empty()) throw DataError(path + ": no data rows");

  Dataset d;
  d.points.resize(labels.size(), dims);
  for (size_t i = 0; i < labels.size(); ++i)
    for (int j = 0; j < dims; ++j) d.points(i, j) = values[i * dims + j];
  d.labels = std::move(labels);
  d.split = std::move(splits);
  return d;
}

inline void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write dataset file: " + path);
  for (int j = 0; j < d.dims(); ++j) out << 'f' << j << ',';
  out << "label";
  if (d.has_split()) out << ",split";
  out << '\n';
  for (int i = 0; i < d.rows(); ++i) {
    for (int j = 0; j < d.dims(); ++j)
      out << detail::format_double(d.points(i, j)) << ',';
    out << d.labels[i];
    if (d.has_split()) out << ',' << d.split[i];
    out << '\n';
  }
  if (!out.flush()) throw DataError("failed writing dataset file: " + path);
}

// Mean-centering plus the top-r right singular vectors.  Rank deficiency
// below r is an error: components are never padded from the null space.
struct PcaMap {
  Eigen::RowVectorXd mean;     // 1 x D
  Eigen::MatrixXd components;  // r x D, orthonormal rows
};

inline PcaMap fit_pca(const PointSet& X, int r) {
  if (X.rows() < 1) throw ConfigError("fit_pca: empty point set");
  if (r < 1 || r > std::min(X.rows(), X.cols()))
    throw ConfigError("fit_pca: r must lie in [1, min(rows, cols)]");
  Eigen::RowVectorXd mean = X.colwise().mean();
  Eigen::MatrixXd C = X.rowwise() - mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(r - 1) <= 1e-12 * std::max(sv(0), 1e-300))
    throw NumericError("fit_pca: data rank is below the requested dimension " +
                       std::to_string(r));
  PcaMap map;
  map.mean = mean;
  map.components = svd.matrixV().leftCols(r).transpose();
  return map;
}

inline PointSet apply_pca(const PcaMap& map, const PointSet& X) {
  if (X.cols() != map.mean.cols()) throw ConfigError("apply_pca: dimension mismatch");
  return (X.rowwise() - map.mean) * map.components.transpose();
}

// Per-coordinate z ->tanh((z - mu) / sigma), sigma floored so constant
// coordinates map to zero instead of dividing by zero.
struct RescaleMap {
  Eigen::RowVectorXd mu;
  Eigen::RowVectorXd sigma;
};

inline RescaleMap fit_tanh(const PointSet& X) {
  if (X.rows() < 2) throw ConfigError("fit_tanh: need at least two rows");
  RescaleMap map;
  map.mu = X.colwise().mean();
  Eigen::MatrixXd C = X.rowwise() - map.mu;
  map.sigma = (C.array().square().colwise().sum() / (X.rows() - 1)).sqrt();
  map.sigma = map.sigma.cwiseMax(1e-6);
  return map;
}

inline PointSet apply_tanh(const RescaleMap& map, const PointSet& X) {
  if (X.cols() != map.mu.cols()) throw ConfigError("apply_tanh: dimension mismatch");
  Eigen::MatrixXd C = X.rowwise() - map.mu;
  // tanh saturates to exactly 1.0 in doubles for huge arguments; clamp to the
  // largest representable value below 1 to keep the open-interval contract.
  const double bound = std::nextafter(1.0, 0.0);
  return (C.array().rowwise() / map.sigma.array()).tanh().min(bound).max(-bound);
}

// Synthetic labeled manifolds with isotropic Gaussian noise.  2-D kinds:
// circle, segment (diagonal), lines (union of y = +-x).  3-D kinds: sphere,
// torus (a (2,3) torus knot with tube radius scale/3).
struct Shape {
  std::string kind;
  double scale = 1.0;
};

struct SynthSpec {
  std::vector<Shape> shapes;  // one per class, labels follow list order
  int per_class = 100;
  double noise = 0.0;
};

namespace detail {

inline int shape_dims(const std::string& kind) {
  if (kind == "circle" || kind == "segment" || kind == "lines") return 2;
  if (kind == "sphere" || kind == "torus") return 3;
  throw ConfigError("unknown shape kind: " + kind);
}

}  // namespace detail

inline Dataset synth_manifolds(const SynthSpec& spec, std::uint64_t seed,
                               std::string_view stream) {
  if (spec.shapes.empty()) throw ConfigError("synth: no shapes given");
  if (spec.per_class < 1) throw ConfigError("synth: per_class must be positive");
  if (spec.noise < 0.0) throw ConfigError("synth: negative noise");
  int dims = detail::shape_dims(spec.shapes[0].kind);
  for (const Shape& s : spec.shapes) {
    if (s.scale <= 0.0) throw ConfigError("synth: shape scale must be positive");
    if (detail::shape_dims(s.kind) != dims)
      throw ConfigError("synth: shapes mix 2-D and 3-D ambient spaces");
  }

  Dataset d;
  d.points.resize(static_cast<Eigen::Index>(spec.shapes.size()) * spec.per_class, dims);
  int row = 0;
  for (size_t k = 0; k < spec.shapes.size(); ++k) {
    const Shape& s = spec.shapes[k];
    Rng rng(seed, std::string(stream) + "-class" + std::to_string(k));
    for (int i = 0; i < spec.per_class; ++i, ++row) {
      Eigen::RowVectorXd p(dims);
      if (s.kind == "circle") {
        double th = 2.0 * M_PI * rng.uniform();
        p << s.scale * std::cos(th), s.scale * std::sin(th);
      } else if (s.kind == "segment") {
        double t = rng.uniform(-1.0, 1.0);
        p << s.scale * t, s.scale * t;
      } else if (s.kind == "lines") {
        double t = rng.uniform(-1.0, 1.0);
        double flip = rng.uniform() < 0.5 ? 1.0 : -1.0;
        p << s.scale * t, flip * s.scale * t;
      } else if (s.kind == "sphere") {
        Eigen::RowVector3d g(rng.normal(), rng.normal(), rng.normal());
        while (g.norm() == 0.0) g << rng.normal(), rng.normal(), rng.normal();
        p = s.scale * g / g.norm();
      } else {  // torus knot, p=2 q=3
        double th = 2.0 * M_PI * rng.uniform();
        double R = s.scale, tube = s.scale / 3.0;
        double ring = R + tube * std::cos(3.0 * th);
        p << ring * std::cos(2.0 * th), ring * std::sin(2.0 * th),
            tube * std::sin(3.0 * th);
      }
      for (int j = 0; j < dims; ++j) p(j) += spec.noise * rng.normal();
      d.points.row(row) = p;
      d.labels.push_back(static_cast<int>(k));
    }
  }
  return d;
}

}  // namespace vinet::features

#endif  // VINET_FEATURES_HPP
