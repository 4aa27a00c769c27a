#pragma once

// Polynomial-feature classification: per-class vanishing generators feed an
// absolute-value polynomial layer, a linear softmax head sits on top.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vinet/errors.hpp"
#include "vinet/features.hpp"
#include "vinet/poly.hpp"
#include "vinet/rng.hpp"
#include "vinet/vanishing.hpp"

namespace vinet::avinn {

// Fit one generator set per class label (labels must cover 0..K-1).  Each
// class gets its own seed stream so subsampling decisions are independent.
inline std::vector<vanishing::GeneratorSet> fit_class_generators(
    const features::Dataset& train, const vanishing::VanishConfig& cfg) {
  int k = train.classes();
  if (k < 1) throw DataError("fit_class_generators: empty training set");
  std::vector<vanishing::GeneratorSet> sets;
  sets.reserve(k);
  for (int c = 0; c < k; ++c) {
    features::Dataset part = train.subset_by_label(c);
    if (part.rows() == 0)
      throw DataError("fit_class_generators: class " + std::to_string(c) +
                      " has no training points");
    vanishing::VanishConfig per = cfg;
    per.seed = stream_seed(cfg.seed, "class-" + std::to_string(c));
    vanishing::GeneratorSet g = vanishing::fit(part.points, per);
    g.class_label = c;
    sets.push_back(std::move(g));
  }
  return sets;
}

// Discriminative score of a generator: the smallest mean absolute value it
// attains on any class other than its own.  Near-zero means the polynomial
// also vanishes on some competing class and carries no label signal.
inline double prune_score(const Polynomial& p, const MonomialBasis& basis,
                          const std::vector<PointSet>& class_points, int own_class) {
  if (class_points.size() < 2)
    throw ConfigError("prune_score: need at least two classes");
  if (own_class < 0 || own_class >= static_cast<int>(class_points.size()))
    throw ConfigError("prune_score: own_class out of range");
  double score = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < class_points.size(); ++c) {
    if (static_cast<int>(c) == own_class) continue;
    const PointSet& Z = class_points[c];
    if (Z.rows() == 0) throw DataError("prune_score: empty class point set");
    double mean = eval_column(p, basis, Z).cwiseAbs().mean();
    score = std::min(score, mean);
  }
  return score;
}

struct PruneReport {
  std::vector<std::vector<double>> scores;  // per class, construction order
  std::vector<std::vector<int>> retained;   // per class, ascending indices kept
  int monomials_before = 0;                 // distinct support monomials, union
  int monomials_after = 0;
};

namespace detail {

inline int count_support(const std::vector<vanishing::GeneratorSet>& sets) {
  std::set<std::vector<int>> support;
  for (const auto& g : sets)
    for (const auto& p : g.generators)
      for (const Term& t : p.terms()) support.insert(g.basis.at(t.monomial).exponents);
  return static_cast<int>(support.size());
}

}  // namespace detail

// Keep the ceil(keep_fraction * n) highest-scoring generators of each class
// (at least one when the class has any).  Ties keep the earlier-constructed
// generator; surviving generators stay in construction order.
inline PruneReport prune(std::vector<vanishing::GeneratorSet>& sets,
                         double keep_fraction,
                         const std::vector<PointSet>& class_points) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0))
    throw ConfigError("prune: keep_fraction must lie in [0, 1]");
  if (class_points.size() != sets.size())
    throw ConfigError("prune: one point set per class required");
  PruneReport report;
  report.monomials_before = detail::count_support(sets);
  for (auto& g : sets) {
    int n = static_cast<int>(g.generators.size());
    std::vector<double> scores(n);
    for (int i = 0; i < n; ++i)
      scores[i] = prune_score(g.generators[i], g.basis, class_points, g.class_label);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    int keep = n == 0 ? 0
                      : std::min(n, std::max(1, static_cast<int>(std::ceil(
                                                    keep_fraction * n))));
    std::vector<int> kept(order.begin(), order.begin() + keep);
    std::sort(kept.begin(), kept.end());
    std::vector<Polynomial> survivors;
    survivors.reserve(kept.size());
    for (int i : kept) survivors.push_back(g.generators[i]);
    g.generators = std::move(survivors);
    g.stats.polynomials = static_cast<int>(g.generators.size());
    report.scores.push_back(std::move(scores));
    report.retained.push_back(std::move(kept));
  }
  report.monomials_after = detail::count_support(sets);
  return report;
}

// Stacked polynomial layer.  Row i of `coefficients` holds one generator
// expressed over the shared union basis; rows are grouped by class with
// `class_offsets` as the K+1 prefix boundaries.  The layer output at z is
// |coefficients * t(z)| where t(z) evaluates every basis monomial.
struct PolynomialLayer {
  MonomialBasis basis;
  Eigen::MatrixXd coefficients;
  std::vector<int> class_offsets;

  PolynomialLayer() : basis(1) {}
  explicit PolynomialLayer(int vars) : basis(vars) {}

  int polynomials() const { return static_cast<int>(coefficients.rows()); }
  int monomials() const { return static_cast<int>(coefficients.cols()); }
  int classes() const { return static_cast<int>(class_offsets.size()) - 1; }
};

// Union the supporting monomials of every retained generator into one basis
// and re-express each generator's coefficients over it.
inline PolynomialLayer build_layer(const std::vector<vanishing::GeneratorSet>& sets) {
  if (sets.empty()) throw ConfigError("build_layer: no generator sets");
  int vars = sets[0].basis.vars();
  std::set<std::vector<int>> support;
  int total = 0;
  for (const auto& g : sets) {
    if (g.basis.vars() != vars)
      throw ConfigError("build_layer: mixed variable counts");
    for (const auto& p : g.generators) {
      ++total;
      for (const Term& t : p.terms()) support.insert(g.basis.at(t.monomial).exponents);
    }
  }
  if (total == 0) throw ConfigError("build_layer: no generators to stack");

  std::vector<Monomial> ms;
  ms.reserve(support.size());
  for (const auto& e : support) ms.push_back(Monomial(e));
  PolynomialLayer layer(vars);
  layer.basis = MonomialBasis::from_monomials(vars, ms);
  layer.coefficients = Eigen::MatrixXd::Zero(total, layer.basis.size());
  layer.class_offsets = {0};
  int row = 0;
  for (const auto& g : sets) {
    for (const auto& p : g.generators) {
      for (const Term& t : p.terms()) {
        int j = layer.basis.index_of(g.basis.at(t.monomial));
        layer.coefficients(row, j) = t.coefficient;
      }
      ++row;
    }
    layer.class_offsets.push_back(row);
  }
  return layer;
}

namespace detail {

// m x S matrix of basis-monomial evaluations over the rows of Z.
inline Eigen::MatrixXd monomial_matrix(const MonomialBasis& basis, const PointSet& Z) {
  Eigen::MatrixXd T(Z.rows(), basis.size());
  for (int j = 0; j < basis.size(); ++j) T.col(j) = eval_column(basis.at(j), Z);
  return T;
}

}  // namespace detail

inline Eigen::MatrixXd transform_all(const PolynomialLayer& layer, const PointSet& Z) {
  if (Z.cols() != layer.basis.vars())
    throw ConfigError("transform: point dimension mismatch");
  Eigen::MatrixXd T = detail::monomial_matrix(layer.basis, Z);
  return (T * layer.coefficients.transpose()).cwiseAbs();
}

template <typename Derived>
Eigen::VectorXd transform(const PolynomialLayer& layer,
                          const Eigen::MatrixBase<Derived>& z) {
  PointSet Z(1, z.size());
  Z.row(0) = z;
  return transform_all(layer, Z).row(0).transpose();
}

struct LinearHead {
  Eigen::MatrixXd W;     // K x N
  Eigen::VectorXd bias;  // K
};

struct TrainOptions {
  double lr = 0.05;
  double momentum = 0.9;
  int epochs = 20;
  int batch = 64;
  std::uint64_t seed = 0;
  bool finetune_coefficients = false;  // also descend on the layer, support frozen
};

struct TrainStats {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

// A full model: optional preprocessing maps, optional polynomial layer, and
// the linear head.  kind is "avinn", "linear", or "random-monomials".
struct Classifier {
  std::string kind = "avinn";
  std::optional<features::PcaMap> pca;
  std::optional<features::RescaleMap> rescale;
  std::optional<PolynomialLayer> layer;
  LinearHead head;
  int classes = 0;
};

namespace detail {

inline PointSet preprocess(const Classifier& c, const PointSet& X) {
  PointSet Z = X;
  if (c.pca) Z = features::apply_pca(*c.pca, Z);
  if (c.rescale) Z = features::apply_tanh(*c.rescale, Z);
  return Z;
}

// Row-wise softmax with the usual max-shift for stability.
inline Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (int i = 0; i < p.rows(); ++i) {
    Eigen::RowVectorXd row = p.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp();
    p.row(i) = row / row.sum();
  }
  return p;
}

}  // namespace detail

// Mini-batch SGD with momentum (velocity = mu * velocity + grad, then
// parameter -= lr * velocity) on the softmax cross-entropy.  The head starts
// from zeros; with finetune_coefficients the layer's nonzero coefficients are
// updated too, using sign(u) as the subgradient of |u| (0 at 0) and keeping
// zero entries exactly zero.
inline TrainStats train_head(Classifier& c, const PointSet& points,
                             const std::vector<int>& labels,
                             const TrainOptions& opts) {
  if (points.rows() != static_cast<Eigen::Index>(labels.size()))
    throw ConfigError("train_head: points/labels size mismatch");
  if (points.rows() == 0) throw DataError("train_head: empty training set");
  if (opts.epochs < 1 || opts.batch < 1)
    throw ConfigError("train_head: epochs and batch must be positive");
  if (c.classes < 2) throw ConfigError("train_head: need at least two classes");
  for (int l : labels)
    if (l < 0 || l >= c.classes) throw DataError("train_head: label out of range");

  const int m = static_cast<int>(points.rows());
  const int k = c.classes;
  PointSet feats = detail::preprocess(c, points);

  // Monomial evaluations are fixed even when coefficients move.
  Eigen::MatrixXd T;  // m x S, layer models only
  Eigen::ArrayXXd mask;
  if (c.layer) {
    T = detail::monomial_matrix(c.layer->basis, feats);
    mask = (c.layer->coefficients.array() != 0.0).cast<double>();
  }
  const int n_features =
      c.layer ? c.layer->polynomials() : static_cast<int>(feats.cols());

  c.head.W = Eigen::MatrixXd::Zero(k, n_features);
  c.head.bias = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd vel_w = Eigen::MatrixXd::Zero(k, n_features);
  Eigen::VectorXd vel_b = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd vel_c;
  if (opts.finetune_coefficients && c.layer)
    vel_c = Eigen::MatrixXd::Zero(c.layer->polynomials(), c.layer->monomials());

  Rng rng(opts.seed, "train-head");
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);

  TrainStats stats;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (int start = 0; start < m; start += opts.batch) {
      int b = std::min(opts.batch, m - start);
      Eigen::MatrixXd G(b, n_features);  // batch features after the layer
      Eigen::MatrixXd P;                 // pre-absolute-value layer output
      Eigen::MatrixXd Tb;
      if (c.layer) {
        Tb.resize(b, c.layer->monomials());
        for (int i = 0; i < b; ++i) Tb.row(i) = T.row(order[start + i]);
        P = Tb * c.layer->coefficients.transpose();
        G = P.cwiseAbs();
      } else {
        for (int i = 0; i < b; ++i) G.row(i) = feats.row(order[start + i]);
      }

      Eigen::MatrixXd logits = G * c.head.W.transpose();
      logits.rowwise() += c.head.bias.transpose();
      Eigen::MatrixXd prob = detail::softmax(logits);
      Eigen::MatrixXd delta = prob;  // d(loss)/d(logits), mean over the batch
      for (int i = 0; i < b; ++i) {
        int y = labels[order[start + i]];
        loss_sum -= std::log(std::max(prob(i, y), 1e-300));
        delta(i, y) -= 1.0;
      }
      delta /= static_cast<double>(b);

      Eigen::MatrixXd grad_w = delta.transpose() * G;
      Eigen::VectorXd grad_b = delta.colwise().sum().transpose();

      if (opts.finetune_coefficients && c.layer) {
        Eigen::MatrixXd grad_g = delta * c.head.W;  // b x N
        Eigen::MatrixXd sign =
            P.unaryExpr([](double u) { return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0); });
        Eigen::MatrixXd grad_c =
            ((grad_g.array() * sign.array()).matrix().transpose() * Tb).array() * mask;
        vel_c = opts.momentum * vel_c + grad_c;
        c.layer->coefficients -= opts.lr * vel_c;
      }

      vel_w = opts.momentum * vel_w + grad_w;
      vel_b = opts.momentum * vel_b + grad_b;
      c.head.W -= opts.lr * vel_w;
      c.head.bias -= opts.lr * vel_b;
    }
    stats.epoch_loss.push_back(loss_sum / m);
  }
  return stats;
}

inline Eigen::MatrixXd logits(const Classifier& c, const PointSet& X) {
  PointSet feats = detail::preprocess(c, X);
  Eigen::MatrixXd G = c.layer ? transform_all(*c.layer, feats) : feats;
  if (G.cols() != c.head.W.cols())
    throw ConfigError("logits: feature width does not match the trained head");
  Eigen::MatrixXd out = G * c.head.W.transpose();
  out.rowwise() += c.head.bias.transpose();
  return out;
}

// Argmax over logits; ties resolve to the lowest class index.
inline std::vector<int> predict(const Classifier& c, const PointSet& X) {
  Eigen::MatrixXd L = logits(c, X);
  std::vector<int> out(L.rows());
  for (int i = 0; i < L.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < L.cols(); ++j)
      if (L(i, j) > L(i, best)) best = j;
    out[i] = best;
  }
  return out;
}

inline double accuracy(const Classifier& c, const PointSet& X,
                       const std::vector<int>& labels) {
  if (X.rows() != static_cast<Eigen::Index>(labels.size()))
    throw ConfigError("accuracy: points/labels size mismatch");
  if (labels.empty()) throw DataError("accuracy: empty evaluation set");
  auto pred = predict(c, X);
  int correct = 0;
  for (size_t i = 0; i < labels.size(); ++i) correct += pred[i] == labels[i];
  return static_cast<double>(correct) / labels.size();
}

// Size-matched control layer: `basis_size` distinct random monomials of
// degree 1..degree_cap with standard-normal coefficients.  Degrees are drawn
// uniformly, then a uniform monomial of that degree via stars and bars.
inline PolynomialLayer random_monomial_layer(int vars, int n_polys, int basis_size,
                                             int degree_cap, std::uint64_t seed) {
  if (vars < 1 || n_polys < 1 || basis_size < 1 || degree_cap < 1)
    throw ConfigError("random_monomial_layer: all sizes must be positive");
  // Count monomials of degree 1..degree_cap, saturating well above any
  // reasonable request so overflow cannot wrap.
  double universe = 0.0;
  for (int d = 1; d <= degree_cap; ++d) {
    double c = 1.0;
    for (int i = 1; i <= d; ++i) c = c * (vars + i - 1) / i;
    universe += c;
    if (universe > 1e15) break;
  }
  if (static_cast<double>(basis_size) > universe)
    throw ConfigError("random_monomial_layer: fewer monomials exist than requested");

  Rng rng(seed, "random-layer");
  std::set<std::vector<int>> chosen;
  long long attempts = 0, limit = 1000LL * basis_size + 1000;
  while (static_cast<int>(chosen.size()) < basis_size) {
    if (++attempts > limit)
      throw ConfigError("random_monomial_layer: sampling failed to find distinct monomials");
    int d = rng.uniform_int(1, degree_cap);
    // d stars among vars + d - 1 slots; runs between bars become exponents.
    std::vector<int> stars = rng.sample_without_replacement(vars + d - 1, d);
    std::vector<int> expo(vars, 0);
    int var = 0;
    size_t s = 0;
    for (int slot = 0; slot < vars + d - 1; ++slot) {
      if (s < stars.size() && stars[s] == slot) {
        ++expo[var];
        ++s;
      } else {
        ++var;
      }
    }
    chosen.insert(expo);
  }

  std::vector<Monomial> ms;
  for (const auto& e : chosen) ms.push_back(Monomial(e));
  PolynomialLayer layer(vars);
  layer.basis = MonomialBasis::from_monomials(vars, ms);
  layer.coefficients.resize(n_polys, basis_size);
  for (int i = 0; i < n_polys; ++i)
    for (int j = 0; j < basis_size; ++j) layer.coefficients(i, j) = rng.normal();
  layer.class_offsets = {0, n_polys};
  return layer;
}

}  // namespace vinet::avinn
