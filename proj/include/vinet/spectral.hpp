#pragma once

// Capacity analysis of polynomial layers: inclusion-exclusion encodings that
// realize monomials with linear maps plus power activations, norm-based
// complexity of the resulting stack, and a margin generalization report.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "vinet/avinn.hpp"
#include "vinet/errors.hpp"
#include "vinet/features.hpp"
#include "vinet/poly.hpp"
#include "vinet/solvers.hpp"

namespace vinet::spectral {

namespace detail {

constexpr int kMaxEncodedDegree = 20;  // 2^d rows per monomial; keep it sane

// All subsets of {0,...,d-1}, ordered by cardinality and lexicographically
// within each cardinality; the empty set comes first.
inline std::vector<std::vector<int>> subsets_by_cardinality(int d) {
  std::vector<std::vector<int>> out;
  out.push_back({});
  for (int k = 1; k <= d; ++k) {
    std::vector<int> c(k);
    std::iota(c.begin(), c.end(), 0);
    while (true) {
      out.push_back(c);
      int i = k - 1;
      while (i >= 0 && c[i] == d - k + i) --i;
      if (i < 0) break;
      ++c[i];
      for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
  }
  return out;
}

inline double int_pow(double base, int e) {
  double v = 1.0;
  for (int i = 0; i < e; ++i) v *= base;
  return v;
}

}  // namespace detail

// Inclusion-exclusion gate of degree d: z holds the 2^d subset sums (ordered
// by cardinality, the empty set contributing the leading zero), and the gate
// returns (1/d!) sum of (-1)^{d-|I|} (subset sum)^d.  For valid subset-sum
// inputs this equals the product of the d underlying variables.
inline double inex_activate(int d, const Eigen::VectorXd& z) {
  if (d < 1 || d > detail::kMaxEncodedDegree)
    throw ConfigError("inex_activate: degree must lie in [1, 20]");
  if (z.size() != (Eigen::Index{1} << d))
    throw ConfigError("inex_activate: expected 2^d subset sums");
  double factorial = 1.0;
  for (int i = 2; i <= d; ++i) factorial *= i;
  double sum = 0.0;
  Eigen::Index idx = 0;
  for (int k = 0; k <= d; ++k) {
    double binom = 1.0;  // C(d, k), enumerated blockwise
    for (int i = 1; i <= k; ++i) binom = binom * (d - i + 1) / i;
    double sign = ((d - k) % 2 == 0) ? 1.0 : -1.0;
    for (long long c = 0; c < static_cast<long long>(binom + 0.5); ++c, ++idx)
      sum += sign * detail::int_pow(z(idx), d);
  }
  return sum / factorial;
}

// Encoding block of a degree-d monomial: duplicate variable i by its exponent
// to get d slots, then emit one row per subset of the slots (cardinality
// order), each row summing the unit vectors of the slots it contains.  The
// block satisfies inex_activate(d, W x) = monomial(x).
inline Eigen::MatrixXd encode_monomial(const Monomial& m) {
  int d = m.degree();
  if (d < 1)
    throw ConfigError("encode_monomial: constants use the bypass channel");
  if (d > detail::kMaxEncodedDegree)
    throw ConfigError("encode_monomial: degree too large to encode");
  std::vector<int> slot_var;
  slot_var.reserve(d);
  for (int i = 0; i < m.vars(); ++i)
    for (int c = 0; c < m.exponents[i]; ++c) slot_var.push_back(i);
  auto subsets = detail::subsets_by_cardinality(d);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(subsets.size(), m.vars());
  for (size_t j = 0; j < subsets.size(); ++j)
    for (int slot : subsets[j]) W(j, slot_var[slot]) += 1.0;
  return W;
}

// A polynomial layer rewritten as linear map + gates + linear map: W_M stacks
// the per-monomial encoding blocks, the gates recover the monomial values
// (constants pass through a channel fixed at 1), and W_C holds the layer's
// coefficient rows over the basis order.
struct EncodedLayer {
  struct Block {
    int degree = 0;
    int row_begin = 0;
    int row_end = 0;
  };

  Eigen::MatrixXd W_M;        // stacked subset-sum rows, s x n
  Eigen::MatrixXd W_C;        // N x S coefficients, basis order
  std::vector<Block> blocks;  // one per basis monomial; constants span no rows
  int vars = 0;
};

inline EncodedLayer encode_layer(const avinn::PolynomialLayer& layer) {
  if (layer.monomials() == 0) throw ConfigError("encode_layer: empty basis");
  EncodedLayer out;
  out.vars = layer.basis.vars();
  out.W_C = layer.coefficients;
  int rows = 0;
  for (int j = 0; j < layer.basis.size(); ++j) {
    int d = layer.basis.at(j).degree();
    EncodedLayer::Block b;
    b.degree = d;
    b.row_begin = rows;
    if (d >= 1) rows += 1 << d;
    b.row_end = rows;
    out.blocks.push_back(b);
  }
  out.W_M.resize(rows, out.vars);
  for (int j = 0; j < layer.basis.size(); ++j) {
    const auto& b = out.blocks[j];
    if (b.degree >= 1)
      out.W_M.middleRows(b.row_begin, b.row_end - b.row_begin) =
          encode_monomial(layer.basis.at(j));
  }
  return out;
}

// Gate outputs for one point: the value of every basis monomial.
inline Eigen::VectorXd activations(const EncodedLayer& e, const Eigen::VectorXd& z) {
  if (z.size() != e.vars) throw ConfigError("activations: point dimension mismatch");
  Eigen::VectorXd pre = e.W_M * z;
  Eigen::VectorXd a(static_cast<Eigen::Index>(e.blocks.size()));
  for (size_t j = 0; j < e.blocks.size(); ++j) {
    const auto& b = e.blocks[j];
    a(j) = b.degree == 0
               ? 1.0
               : inex_activate(b.degree, pre.segment(b.row_begin, b.row_end - b.row_begin));
  }
  return a;
}

// Pre-absolute-value polynomial outputs of the encoded layer.
inline Eigen::VectorXd encoded_forward(const EncodedLayer& e, const Eigen::VectorXd& z) {
  return e.W_C * activations(e, z);
}

// One layer of a host network: its weight matrix and activation Lipschitz
// constant.
struct HostLayer {
  Eigen::MatrixXd W;
  double rho = 1.0;
};

// (prod rho_i ||W_i||_2) * (sum (||W_i^T||_{2,1} / ||W_i||_2)^{2/3})^{3/2}.
inline double spectral_complexity(const std::vector<HostLayer>& layers) {
  if (layers.empty()) throw ConfigError("spectral_complexity: empty layer list");
  double prod = 1.0, sum = 0.0;
  for (const auto& l : layers) {
    if (!(l.rho > 0.0))
      throw ConfigError("spectral_complexity: Lipschitz constants must be positive");
    if (l.W.size() == 0) throw ConfigError("spectral_complexity: empty matrix");
    auto norms = solvers::matrix_norms(l.W);
    if (norms.spectral <= 0.0)
      throw ConfigError("spectral_complexity: zero matrix has no norm ratio");
    prod *= l.rho * norms.spectral;
    sum += std::pow(norms.two_one_of_transpose / norms.spectral, 2.0 / 3.0);
  }
  return prod * std::pow(sum, 1.5);
}

struct SpectralReport {
  // Full stack order: host layers first, then W_M, W_C, W_F.
  std::vector<double> spectral_norms;
  std::vector<double> two_one_norms;
  std::vector<double> rhos;

  double r_phi = std::numeric_limits<double>::quiet_NaN();  // host stack alone
  double r_avinn = 0.0;                                     // with the three appended layers
  double kappa = std::numeric_limits<double>::quiet_NaN();  // r_avinn / r_phi, closed form
  bool kappa_ok = true;

  double measured_product = 0.0, bound_product = 0.0;
  double measured_sum = 0.0, bound_sum = 0.0;
  bool product_ok = false, sum_ok = false;

  double lambda1 = 0.0;  // ||W_F||_2
  double lambda2 = 0.0;  // ||W_F^T||_{2,1} / ||W_F||_2
  double tau = 0.0;      // coefficient-row l1 budget
  int degree = 0;        // max encoded monomial degree
  int n_polynomials = 0;
  int n_monomials = 0;
  int width = 0;  // largest layer output dimension

  double margin = 0.0;             // gamma, set by the caller
  double margin_loss_value = 0.0;  // L_gamma at that margin
};

// Assemble the capacity report for truncated-stack + encoded layer + linear
// head, measured against the full reference network whose tail the new layers
// replace.  The truncated stack must be a prefix of the full one.  The
// appended layers carry Lipschitz constants (d, 1, 1).  kappa is computed
// from the closed-form ratio of the two stacks' products and ratio sums and
// cross-checked against direct recomputation of both complexities.  When tau
// is omitted it defaults to the largest coefficient-row l1 norm; a declared
// budget below that is rejected.
inline SpectralReport theorem_report(const std::vector<HostLayer>& host,
                                     const EncodedLayer& enc,
                                     const Eigen::MatrixXd& head,
                                     const std::vector<HostLayer>& full_network,
                                     std::optional<double> declared_tau = std::nullopt) {
  if (head.size() == 0) throw ConfigError("theorem_report: empty head matrix");
  if (full_network.size() < host.size())
    throw ConfigError("theorem_report: full network shorter than the truncated stack");
  for (size_t i = 0; i < host.size(); ++i) {
    const HostLayer& a = host[i];
    const HostLayer& b = full_network[i];
    if (a.rho != b.rho || a.W.rows() != b.W.rows() || a.W.cols() != b.W.cols() ||
        !(a.W == b.W))
      throw ConfigError(
          "theorem_report: truncated stack is not a prefix of the full network");
  }
  int d = 0;
  for (const auto& b : enc.blocks) d = std::max(d, b.degree);
  if (d < 1)
    throw ConfigError("theorem_report: layer encodes no positive-degree monomial");

  const double n_poly = static_cast<double>(enc.W_C.rows());
  const double n_mono = static_cast<double>(enc.W_C.cols());
  double tau_measured = 0.0;
  for (int i = 0; i < enc.W_C.rows(); ++i)
    tau_measured = std::max(tau_measured, enc.W_C.row(i).cwiseAbs().sum());
  if (declared_tau && *declared_tau < tau_measured - 1e-12)
    throw ConfigError("theorem_report: declared coefficient budget below measured rows");
  const double tau = declared_tau ? *declared_tau : tau_measured;

  SpectralReport rep;
  rep.degree = d;
  rep.n_polynomials = static_cast<int>(n_poly);
  rep.n_monomials = static_cast<int>(n_mono);
  rep.tau = tau;

  std::vector<HostLayer> stack = host;
  stack.push_back({enc.W_M, static_cast<double>(d)});
  stack.push_back({enc.W_C, 1.0});
  stack.push_back({head, 1.0});

  double host_sum = 0.0;
  std::vector<double> ratios;
  for (const auto& l : stack) {
    if (l.W.size() == 0) throw ConfigError("theorem_report: empty layer matrix");
    auto norms = solvers::matrix_norms(l.W);
    if (norms.spectral <= 0.0) throw ConfigError("theorem_report: zero-norm layer");
    rep.spectral_norms.push_back(norms.spectral);
    rep.two_one_norms.push_back(norms.two_one_of_transpose);
    rep.rhos.push_back(l.rho);
    ratios.push_back(std::pow(norms.two_one_of_transpose / norms.spectral, 2.0 / 3.0));
    rep.width = std::max(rep.width, static_cast<int>(l.W.rows()));
  }
  size_t nh = host.size();
  for (size_t i = 0; i < nh; ++i) host_sum += ratios[i];

  const double s_m = rep.spectral_norms[nh];
  const double s_c = rep.spectral_norms[nh + 1];
  rep.lambda1 = rep.spectral_norms[nh + 2];
  rep.lambda2 = rep.two_one_norms[nh + 2] / rep.lambda1;

  rep.measured_product = d * s_m * s_c * rep.lambda1;
  rep.bound_product =
      std::pow(2.0, d) * d * tau * rep.lambda1 * std::sqrt(n_poly * n_mono);
  rep.measured_sum = ratios[nh] + ratios[nh + 1] + ratios[nh + 2];
  rep.bound_sum = std::pow(2.0, 2.0 * d / 3.0) * std::pow(n_mono, 2.0 / 3.0) +
                  std::pow(n_poly, 2.0 / 3.0) * std::pow(n_mono, 1.0 / 3.0) +
                  std::pow(rep.lambda2, 2.0 / 3.0);
  rep.product_ok = rep.measured_product <= rep.bound_product * (1.0 + 1e-12);
  rep.sum_ok = rep.measured_sum <= rep.bound_sum * (1.0 + 1e-12);

  // Norm contributions of the full network's tail, the layers the encoded
  // block and head stand in for.  Empty tail: product 1, sum 0.
  double replaced_prod = 1.0, replaced_sum = 0.0;
  for (size_t i = host.size(); i < full_network.size(); ++i) {
    const HostLayer& l = full_network[i];
    if (l.W.size() == 0) throw ConfigError("theorem_report: empty layer matrix");
    auto norms = solvers::matrix_norms(l.W);
    if (norms.spectral <= 0.0) throw ConfigError("theorem_report: zero-norm layer");
    replaced_prod *= l.rho * norms.spectral;
    replaced_sum += std::pow(norms.two_one_of_transpose / norms.spectral, 2.0 / 3.0);
  }

  rep.r_avinn = spectral_complexity(stack);
  if (!full_network.empty()) {
    rep.r_phi = spectral_complexity(full_network);
    rep.kappa = (rep.measured_product / replaced_prod) *
                std::pow((host_sum + rep.measured_sum) / (host_sum + replaced_sum), 1.5);
    rep.kappa_ok =
        std::abs(rep.kappa * rep.r_phi - rep.r_avinn) <= 1e-9 * std::abs(rep.r_avinn);
  }
  return rep;
}

// Overload for the common case where nothing was cut off the reference
// network: the truncated stack is the whole of it, and kappa reduces to the
// appended layers' multiplicative contribution.
inline SpectralReport theorem_report(const std::vector<HostLayer>& host,
                                     const EncodedLayer& enc,
                                     const Eigen::MatrixXd& head,
                                     std::optional<double> declared_tau = std::nullopt) {
  return theorem_report(host, enc, head, host, declared_tau);
}

// Fraction of samples whose margin (true-class logit minus best other logit)
// is at most gamma.
inline double margin_loss(const avinn::Classifier& model, const features::Dataset& data,
                          double gamma) {
  if (data.rows() == 0) throw DataError("margin_loss: empty dataset");
  if (!(gamma > 0.0)) throw ConfigError("margin_loss: gamma must be positive");
  Eigen::MatrixXd L = avinn::logits(model, data.points);
  int hits = 0;
  for (int i = 0; i < L.rows(); ++i) {
    int y = data.labels[i];
    if (y < 0 || y >= L.cols()) throw DataError("margin_loss: label out of range");
    double other = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < L.cols(); ++k)
      if (k != y) other = std::max(other, L(i, k));
    if (L(i, y) - other <= gamma) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(L.rows());
}

// Margin bound: L_gamma + (||X||_F * R / (gamma sqrt(m))) ln(width)
//             + sqrt(ln(1/delta) / m), with the universal constant set to 1
// (reported, not certified).
inline double generalization_bound(const SpectralReport& rep, double data_norm, int m,
                                   double delta) {
  if (m < 1) throw ConfigError("generalization_bound: need at least one sample");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("generalization_bound: delta must lie in (0, 1)");
  if (!(rep.margin > 0.0))
    throw ConfigError("generalization_bound: margin must be positive");
  if (rep.width < 1) throw ConfigError("generalization_bound: invalid width");
  if (!std::isfinite(rep.r_avinn) || rep.r_avinn < 0.0)
    throw ConfigError("generalization_bound: invalid complexity value");
  double sqm = std::sqrt(static_cast<double>(m));
  return rep.margin_loss_value +
         (data_norm * rep.r_avinn / (rep.margin * sqm)) *
             std::log(static_cast<double>(rep.width)) +
         std::sqrt(std::log(1.0 / delta) / static_cast<double>(m));
}

}  // namespace vinet::spectral
