// Acceptance gate: every release-blocking behavior checked end to end, one
// verdict line per criterion.  Exits nonzero if anything fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vinet/avinn.hpp"
#include "vinet/bundle.hpp"
#include "vinet/cli.hpp"
#include "vinet/features.hpp"
#include "vinet/poly.hpp"
#include "vinet/rng.hpp"
#include "vinet/solvers.hpp"
#include "vinet/spectral.hpp"
#include "vinet/vanishing.hpp"

namespace {

using Clock = std::chrono::steady_clock;
using vinet::Monomial;
using vinet::PointSet;
using vinet::Polynomial;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      note(why);
    }
  }
  void note(const std::string& text) {
    if (!detail.empty()) detail += "; ";
    detail += text;
  }
};

PointSet circle_points(int m, double radius, std::uint64_t seed, const char* stream) {
  vinet::Rng rng(seed, stream);
  PointSet Z(m, 2);
  for (int i = 0; i < m; ++i) {
    double a = rng.uniform(0.0, 2.0 * M_PI);
    Z(i, 0) = radius * std::cos(a);
    Z(i, 1) = radius * std::sin(a);
  }
  return Z;
}

// ---------------------------------------------------------------------------
// 1. Circle recovery under all three construction algorithms.
Verdict criterion_circle_recovery() {
  Verdict v;
  PointSet train = circle_points(256, 1.0, 101, "accept-circle");
  PointSet fresh = circle_points(1000, 1.0, 202, "accept-circle-fresh");

  for (auto alg : {vinet::vanishing::Algorithm::abm, vinet::vanishing::Algorithm::oavi_fw,
                   vinet::vanishing::Algorithm::oavi_agd}) {
    vinet::vanishing::VanishConfig cfg;
    cfg.algorithm = alg;
    cfg.psi = 1e-8;
    cfg.tau = 4.0;
    cfg.max_degree = 2;
    cfg.oracle_tolerance = 1e-10;
    cfg.oracle_max_iters = 200000;
    auto t0 = Clock::now();
    auto g = vinet::vanishing::fit(train, cfg);
    double secs = seconds_since(t0);
    std::string tag = vinet::vanishing::algorithm_name(alg);

    v.require(secs < 1.0, tag + " took " + std::to_string(secs) + "s");
    v.require(g.generators.size() == 1,
              tag + " produced " + std::to_string(g.generators.size()) + " generators");
    if (g.generators.size() != 1) continue;
    const Polynomial& p = g.generators[0];
    v.require(g.basis.at(p.leading_index()).degree() == 2, tag + " leading degree != 2");

    std::map<std::vector<int>, double> expected{
        {{0, 0}, -1.0}, {{2, 0}, 1.0}, {{0, 2}, 1.0}};
    double worst = 0.0;
    for (const auto& t : p.terms()) {
      auto it = expected.find(g.basis.at(t.monomial).exponents);
      double want = it == expected.end() ? 0.0 : it->second;
      worst = std::max(worst, std::abs(t.coefficient - want));
      if (it != expected.end()) expected.erase(it);
    }
    for (auto& [e, c] : expected) worst = std::max(worst, std::abs(c));
    v.require(worst <= 1e-5, tag + " coefficient error " + std::to_string(worst));

    double max_eval = vinet::eval_column(p, g.basis, fresh).cwiseAbs().maxCoeff();
    v.require(max_eval <= 1e-5, tag + " fresh-point residual " + std::to_string(max_eval));
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s %.3fs", tag.c_str(), secs);
    v.note(buf);
  }
  return v;
}

// Shared state for criteria 2, 3, and 6.
struct SeparationRun {
  vinet::features::Dataset train, test;
  vinet::avinn::Classifier model;
  double avinn_accuracy = 0.0;
  double seconds = 0.0;
};

SeparationRun run_separation() {
  SeparationRun run;
  vinet::features::SynthSpec spec;
  spec.shapes = {{"circle", 1.0}, {"circle", 0.5}};
  spec.per_class = 1000;  // 500 train + 500 test per class
  spec.noise = 0.02;
  auto all = vinet::features::synth_manifolds(spec, 301, "accept-separation");
  std::vector<int> train_idx, test_idx;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 1000; ++i)
      (i < 500 ? train_idx : test_idx).push_back(k * 1000 + i);
  run.train = all.select(train_idx, false);
  run.test = all.select(test_idx, false);

  auto t0 = Clock::now();
  auto prep = vinet::cli::detail::fit_preprocess(run.train.points, 0, /*rescale=*/true);
  vinet::features::Dataset pre = run.train;
  pre.points = vinet::cli::detail::apply_preprocess(prep, run.train.points);

  vinet::vanishing::VanishConfig vc;
  vc.psi = 0.05;
  vc.max_degree = 4;
  vc.seed = 311;
  auto sets = vinet::avinn::fit_class_generators(pre, vc);

  run.model.kind = "avinn";
  run.model.classes = 2;
  run.model.rescale = prep.rescale;
  run.model.layer = vinet::avinn::build_layer(sets);
  vinet::avinn::TrainOptions topts;
  topts.seed = 313;
  vinet::avinn::train_head(run.model, run.train.points, run.train.labels, topts);
  run.seconds = seconds_since(t0);
  run.avinn_accuracy =
      vinet::avinn::accuracy(run.model, run.test.points, run.test.labels);
  return run;
}

// 2. AVINN beats a raw linear head on concentric circles.
Verdict criterion_separation(const SeparationRun& run) {
  Verdict v;
  v.require(run.avinn_accuracy >= 0.98,
            "avinn test accuracy " + std::to_string(run.avinn_accuracy));
  v.require(run.seconds < 30.0, "pipeline took " + std::to_string(run.seconds) + "s");

  vinet::avinn::Classifier linear;
  linear.kind = "linear";
  linear.classes = 2;
  vinet::avinn::TrainOptions topts;
  topts.seed = 313;
  vinet::avinn::train_head(linear, run.train.points, run.train.labels, topts);
  double lacc = vinet::avinn::accuracy(linear, run.test.points, run.test.labels);
  v.require(lacc <= 0.75, "linear accuracy " + std::to_string(lacc));

  char buf[128];
  std::snprintf(buf, sizeof buf, "avinn %.4f vs linear %.4f in %.2fs",
                run.avinn_accuracy, lacc, run.seconds);
  v.note(buf);
  return v;
}

// 3. Shape-matched random-monomial layers lose on average over 5 seeds.
// Both arms get the identical fixed two-epoch budget; at saturation the task
// is too easy to distinguish feature quality.
Verdict criterion_random_baseline(const SeparationRun& run) {
  Verdict v;
  const auto& ref = *run.model.layer;
  double avinn_sum = 0.0, random_sum = 0.0;
  for (int s = 0; s < 5; ++s) {
    vinet::avinn::TrainOptions topts;
    topts.seed = 400 + s;
    topts.epochs = 2;

    vinet::avinn::Classifier a;
    a.kind = "avinn";
    a.classes = 2;
    a.rescale = run.model.rescale;
    a.layer = ref;
    vinet::avinn::train_head(a, run.train.points, run.train.labels, topts);
    avinn_sum += vinet::avinn::accuracy(a, run.test.points, run.test.labels);

    vinet::avinn::Classifier r;
    r.kind = "random-monomials";
    r.classes = 2;
    r.rescale = run.model.rescale;
    r.layer = vinet::avinn::random_monomial_layer(2, ref.polynomials(), ref.monomials(),
                                                  5, 500 + s);
    vinet::avinn::train_head(r, run.train.points, run.train.labels, topts);
    random_sum += vinet::avinn::accuracy(r, run.test.points, run.test.labels);
  }
  double avinn_mean = avinn_sum / 5.0, random_mean = random_sum / 5.0;
  v.require(random_mean < avinn_mean,
            "random mean " + std::to_string(random_mean) + " not below avinn mean " +
                std::to_string(avinn_mean));
  char buf[96];
  std::snprintf(buf, sizeof buf,
                "avinn mean %.4f vs random mean %.4f at equal 2-epoch budget",
                avinn_mean, random_mean);
  v.note(buf);
  return v;
}

// 4. Every generator the l1-constrained routes produce is feasible.
Verdict criterion_oavi_feasibility() {
  Verdict v;
  std::vector<vinet::features::SynthSpec> specs(3);
  specs[0].shapes = {{"circle", 0.85}};
  specs[0].noise = 0.01;
  specs[1].shapes = {{"lines", 0.8}};
  specs[1].noise = 0.005;
  specs[2].shapes = {{"sphere", 0.9}};
  specs[2].noise = 0.005;
  for (auto& s : specs) s.per_class = 200;

  int generators = 0, violations = 0, fits = 0;
  for (auto alg :
       {vinet::vanishing::Algorithm::oavi_fw, vinet::vanishing::Algorithm::oavi_agd}) {
    for (size_t di = 0; di < specs.size(); ++di) {
      PointSet Z =
          vinet::features::synth_manifolds(specs[di], 600 + di, "accept-oavi").points;
      for (double psi : {1e-3, 1e-2, 1e-1}) {
        for (double tau : {2.0, 4.0, 10.0}) {
          for (int degree : {2, 3}) {
            vinet::vanishing::VanishConfig cfg;
            cfg.algorithm = alg;
            cfg.psi = psi;
            cfg.tau = tau;
            cfg.max_degree = degree;
            auto g = vinet::vanishing::fit(Z, cfg);
            ++fits;
            for (const auto& p : g.generators) {
              ++generators;
              double m = vinet::mse(p, g.basis, Z);
              double tail = 0.0;
              for (const auto& t : p.terms())
                if (t.monomial != p.leading_index()) tail += std::abs(t.coefficient);
              if (!(m <= psi) || !(tail <= tau - 1.0 + 1e-9)) ++violations;
            }
          }
        }
      }
    }
  }
  v.require(violations == 0, std::to_string(violations) + " infeasible generators");
  v.note(std::to_string(generators) + " generators across " + std::to_string(fits) +
         " fits all satisfy mse <= psi and ||c||_1 <= tau-1");
  return v;
}

// 5. Gate-vs-monomial equivalence and the degree-d Lipschitz property.
Verdict criterion_inex_equivalence() {
  Verdict v;
  vinet::Rng rng(700, "accept-inex");
  double worst_err = 0.0, worst_ratio_slack = -1e300;
  for (int t = 0; t < 1000; ++t) {
    int n = rng.uniform_int(1, 8);
    int d = rng.uniform_int(1, 5);
    std::vector<int> expo(n, 0);
    for (int b = 0; b < d; ++b) expo[rng.uniform_int(0, n - 1)] += 1;
    Monomial m(expo);
    Eigen::MatrixXd W = vinet::spectral::encode_monomial(m);

    for (int p = 0; p < 100; ++p) {
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) x(i) = rng.uniform(-1, 1);
      double got = vinet::spectral::inex_activate(d, W * x);
      double want = vinet::eval(m, x.transpose());
      worst_err = std::max(worst_err, std::abs(got - want));
    }
    for (int p = 0; p < 10; ++p) {
      Eigen::VectorXd u(n), w(n);
      for (int i = 0; i < n; ++i) {
        u(i) = rng.uniform(-1, 1);
        w(i) = rng.uniform(-1, 1);
      }
      double dist = (u - w).norm();
      if (dist <= 1e-12) continue;
      double ratio = std::abs(vinet::spectral::inex_activate(d, W * u) -
                              vinet::spectral::inex_activate(d, W * w)) /
                     dist;
      worst_ratio_slack = std::max(worst_ratio_slack, ratio - d);
    }
  }
  v.require(worst_err <= 1e-9, "max equivalence error " + std::to_string(worst_err));
  v.require(worst_ratio_slack <= 1e-6,
            "Lipschitz ratio exceeds degree by " + std::to_string(worst_ratio_slack));
  char buf[96];
  std::snprintf(buf, sizeof buf, "max err %.2e, worst ratio slack %.2e", worst_err,
                worst_ratio_slack);
  v.note(buf);
  return v;
}

void check_lemma_bounds(Verdict& v, const vinet::spectral::EncodedLayer& enc,
                        const std::string& tag) {
  int d = 0;
  for (const auto& b : enc.blocks) d = std::max(d, b.degree);
  double S = static_cast<double>(enc.W_C.cols());
  double N = static_cast<double>(enc.W_C.rows());
  auto nm = vinet::solvers::matrix_norms(enc.W_M);
  v.require(nm.spectral <= std::pow(2.0, d / 2.0) * d * std::sqrt(S) + 1e-9,
            tag + ": encoding spectral bound violated");
  v.require(nm.two_one_of_transpose / nm.spectral <= std::pow(2.0, d) * S + 1e-9,
            tag + ": encoding ratio bound violated");
  double tau = 0.0;
  for (int i = 0; i < enc.W_C.rows(); ++i)
    tau = std::max(tau, enc.W_C.row(i).cwiseAbs().sum());
  auto nc = vinet::solvers::matrix_norms(enc.W_C);
  v.require(nc.spectral <= std::sqrt(N) * tau + 1e-9,
            tag + ": coefficient spectral bound violated");
  v.require(nc.two_one_of_transpose / nc.spectral <= N * std::sqrt(S) + 1e-9,
            tag + ": coefficient ratio bound violated");
}

// 6. Norm lemmas, the kappa identity, and the worked xy instance.
Verdict criterion_theory_bounds(const SeparationRun& run,
                                const std::vector<vinet::spectral::EncodedLayer>& extra) {
  Verdict v;

  // Worked instance: single polynomial xy, 1x1 identity head.
  vinet::avinn::PolynomialLayer xy(2);
  xy.basis = vinet::MonomialBasis::from_monomials(2, {Monomial({1, 1})});
  xy.coefficients = Eigen::MatrixXd::Ones(1, 1);
  xy.class_offsets = {0, 1};
  auto enc_xy = vinet::spectral::encode_layer(xy);
  auto rep = vinet::spectral::theorem_report({}, enc_xy, Eigen::MatrixXd::Identity(1, 1));
  v.require(std::abs(rep.bound_product - 8.0) <= 1e-9,
            "xy bound_product " + std::to_string(rep.bound_product));
  double want_sum = std::pow(2.0, 4.0 / 3.0) + 2.0;
  v.require(std::abs(rep.bound_sum - want_sum) <= 1e-9,
            "xy bound_sum " + std::to_string(rep.bound_sum));
  v.require(rep.measured_product < rep.bound_product, "xy product not below bound");
  v.require(rep.measured_sum < rep.bound_sum, "xy sum not below bound");

  // Lemma inequalities for every encoded layer this binary constructed.
  std::vector<vinet::spectral::EncodedLayer> layers = extra;
  layers.push_back(enc_xy);
  layers.push_back(vinet::spectral::encode_layer(*run.model.layer));
  for (size_t i = 0; i < layers.size(); ++i)
    check_lemma_bounds(v, layers[i], "layer " + std::to_string(i));

  // kappa identity on random host stacks in front of random encoded layers.
  vinet::Rng rng(801, "accept-kappa");
  auto random_matrix = [&](int r, int c) {
    Eigen::MatrixXd W(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) W(i, j) = rng.normal();
    return W;
  };
  for (int t = 0; t < 5; ++t) {
    auto layer = vinet::avinn::random_monomial_layer(3, 4, 6, 3, 900 + t);
    auto enc = vinet::spectral::encode_layer(layer);
    std::vector<vinet::spectral::HostLayer> host = {{random_matrix(4, 6), 1.0},
                                                    {random_matrix(3, 4), 2.0}};
    auto r = vinet::spectral::theorem_report(host, enc, random_matrix(2, 4));
    double rel = std::abs(r.kappa * r.r_phi - r.r_avinn) / std::abs(r.r_avinn);
    v.require(r.kappa_ok && rel <= 1e-9,
              "kappa identity off by relative " + std::to_string(rel));

    // Same truncated stack against a longer reference network whose tail the
    // encoded layer and head replace.
    std::vector<vinet::spectral::HostLayer> full = host;
    full.push_back({random_matrix(5, 3), 1.0});
    full.push_back({random_matrix(2, 5), 2.0});
    auto rf = vinet::spectral::theorem_report(host, enc, random_matrix(2, 4), full);
    double relf = std::abs(rf.kappa * rf.r_phi - rf.r_avinn) / std::abs(rf.r_avinn);
    v.require(rf.kappa_ok && relf <= 1e-9,
              "tail-replacement kappa identity off by relative " + std::to_string(relf));
    check_lemma_bounds(v, enc, "random layer " + std::to_string(t));
  }
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "xy: product %.3f<=8, sum %.3f<=%.3f; %zu layers obey norm lemmas",
                rep.measured_product, rep.measured_sum, want_sum, layers.size() + 5);
  v.note(buf);
  return v;
}

// Three concentric ellipse classes.  Each class yields a quadratic relation
// on {1, x^2, y^2} plus two cubic relations whose supports split into
// {x, x^3, xy^2} and {y, x^2y, y^3}: partially disjoint supports, so pruning
// whole generators can actually retire monomials.  Noise-free keeps the
// supports exactly sparse.
vinet::features::Dataset ellipse_classes(int per_class, std::uint64_t seed,
                                         const char* stream) {
  vinet::features::Dataset d;
  d.points.resize(3 * per_class, 2);
  const double radii[3] = {1.0, 0.85, 0.7};
  for (int k = 0; k < 3; ++k) {
    vinet::Rng rng(seed, std::string(stream) + "-class" + std::to_string(k));
    for (int i = 0; i < per_class; ++i) {
      double a = rng.uniform(0.0, 2.0 * M_PI);
      int row = k * per_class + i;
      d.points(row, 0) = 0.9 * radii[k] * std::cos(a);
      d.points(row, 1) = 0.45 * radii[k] * std::sin(a);
      d.labels.push_back(k);
    }
  }
  return d;
}

// 7. Pruning shrinks the shared basis without losing accuracy.
Verdict criterion_pruning(std::vector<vinet::spectral::EncodedLayer>& encoded_out) {
  Verdict v;
  auto train = ellipse_classes(160, 1001, "accept-prune");
  auto test = ellipse_classes(160, 1002, "accept-prune-test");

  vinet::vanishing::VanishConfig vc;
  vc.psi = 1e-8;
  vc.max_degree = 3;
  vc.seed = 1003;
  auto sets_full = vinet::avinn::fit_class_generators(train, vc);
  auto sets_pruned = sets_full;

  std::vector<PointSet> per_class;
  for (int k = 0; k < 3; ++k) per_class.push_back(train.subset_by_label(k).points);
  auto report = vinet::avinn::prune(sets_pruned, 0.5, per_class);

  double shrink = 1.0 - static_cast<double>(report.monomials_after) /
                            static_cast<double>(report.monomials_before);
  v.require(shrink >= 0.20, "basis shrink only " + std::to_string(shrink));

  auto train_model = [&](const std::vector<vinet::vanishing::GeneratorSet>& sets) {
    vinet::avinn::Classifier c;
    c.kind = "avinn";
    c.classes = 3;
    c.layer = vinet::avinn::build_layer(sets);
    vinet::avinn::TrainOptions topts;
    topts.seed = 1005;
    vinet::avinn::train_head(c, train.points, train.labels, topts);
    return c;
  };
  auto full_model = train_model(sets_full);
  auto pruned_model = train_model(sets_pruned);
  double acc_full = vinet::avinn::accuracy(full_model, test.points, test.labels);
  double acc_pruned = vinet::avinn::accuracy(pruned_model, test.points, test.labels);
  v.require(acc_full - acc_pruned <= 0.02 + 1e-12,
            "accuracy dropped " + std::to_string(acc_full - acc_pruned));

  encoded_out.push_back(vinet::spectral::encode_layer(*full_model.layer));
  encoded_out.push_back(vinet::spectral::encode_layer(*pruned_model.layer));

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "monomials %d -> %d (%.1f%%), accuracy %.4f -> %.4f",
                report.monomials_before, report.monomials_after, 100.0 * shrink,
                acc_full, acc_pruned);
  v.note(buf);
  return v;
}

// 8. Byte-identical bundles and metrics across repeated runs.
Verdict criterion_determinism() {
  Verdict v;
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "vinet-acceptance-determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto file = [&](const char* name) { return (dir / name).string(); };
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  int rc = vinet::cli::run({"synth", "--shapes", "circle:0.9,circle:0.45", "--per-class",
                            "80", "--noise", "0.01", "--test-fraction", "0.25", "--seed",
                            "42", "--out", file("data.csv")});
  v.require(rc == 0, "synth exit " + std::to_string(rc));
  for (const char* out : {"m1.json", "m2.json"}) {
    rc = vinet::cli::run({"fit", "--data", file("data.csv"), "--out", file(out), "--psi",
                          "0.05", "--max-degree", "3", "--seed", "42"});
    v.require(rc == 0, std::string("fit exit ") + std::to_string(rc));
  }
  v.require(slurp(file("m1.json")) == slurp(file("m2.json")), "bundles differ");
  for (const char* out : {"e1.json", "e2.json"}) {
    rc = vinet::cli::run({"eval", "--bundle", file("m1.json"), "--data", file("data.csv"),
                          "--out", file(out)});
    v.require(rc == 0, std::string("eval exit ") + std::to_string(rc));
  }
  v.require(slurp(file("e1.json")) == slurp(file("e2.json")), "metrics differ");
  v.note("bundle and metrics bytes identical across reruns");
  fs::remove_all(dir);
  return v;
}

// Independent projected-gradient oracle for criterion 9: bisection projection
// plus plain gradient steps at the exact Lipschitz step size.
Eigen::VectorXd oracle_project(const Eigen::VectorXd& y, double radius) {
  if (y.cwiseAbs().sum() <= radius) return y;
  double lo = 0.0, hi = y.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double s = (y.cwiseAbs().array() - mid).max(0.0).sum();
    (s > radius ? lo : hi) = mid;
  }
  double theta = 0.5 * (lo + hi);
  return y.array().sign() * (y.cwiseAbs().array() - theta).max(0.0);
}

double oracle_pgd_objective(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            double radius) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  double smax = svd.singularValues()(0);
  double m = static_cast<double>(A.rows());
  double step = m / (2.0 * smax * smax + 1e-300);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(A.cols());
  for (int it = 0; it < 400000; ++it) {
    Eigen::VectorXd grad = 2.0 / m * (A.transpose() * (A * y + b));
    Eigen::VectorXd next = oracle_project(y - step * grad, radius);
    if ((next - y).norm() <= 1e-14 * (1.0 + y.norm())) {
      y = next;
      break;
    }
    y = next;
  }
  return (A * y + b).squaredNorm() / m;
}

// 9. Frank-Wolfe and accelerated gradient agree with the oracle.
Verdict criterion_solver_crosscheck() {
  Verdict v;
  vinet::Rng rng(1100, "accept-solvers");
  double worst_pair = 0.0, worst_oracle = 0.0;
  for (int t = 0; t < 50; ++t) {
    int m = rng.uniform_int(20, 40);
    int n = rng.uniform_int(5, 15);
    vinet::solvers::LsProblem p;
    p.A.resize(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) p.A(i, j) = rng.normal();
    p.radius = std::vector<double>{0.5, 1.0, 2.0, 5.0}[t % 4];
    Eigen::VectorXd target(n);
    for (int j = 0; j < n; ++j) target(j) = rng.uniform(-1.0, 1.0);
    target = oracle_project(target, 0.9 * p.radius);
    Eigen::VectorXd noise(m);
    for (int i = 0; i < m; ++i) noise(i) = 0.05 * rng.normal();
    p.b = -(p.A * target) + noise;
    p.tolerance = 1e-9;
    p.max_iters = 300000;

    auto fw = vinet::solvers::l1_ls_fw(p);
    auto agd = vinet::solvers::l1_ls_agd(p);
    double oracle = oracle_pgd_objective(p.A, p.b, p.radius);
    worst_pair = std::max(worst_pair, std::abs(fw.objective - agd.objective));
    worst_oracle = std::max({worst_oracle, std::abs(fw.objective - oracle),
                             std::abs(agd.objective - oracle)});
  }
  v.require(worst_pair <= 1e-5, "fw/agd gap " + std::to_string(worst_pair));
  v.require(worst_oracle <= 1e-6, "oracle gap " + std::to_string(worst_oracle));
  char buf[96];
  std::snprintf(buf, sizeof buf, "max |fw-agd| %.2e, max |-oracle| %.2e", worst_pair,
                worst_oracle);
  v.note(buf);
  return v;
}

}  // namespace

int main() {
  struct Entry {
    std::string name;
    Verdict verdict;
  };
  std::vector<Entry> entries;

  SeparationRun sep = run_separation();
  std::vector<vinet::spectral::EncodedLayer> encoded;

  entries.push_back({"circle recovery (abm, oavi-fw, oavi-agd)", criterion_circle_recovery()});
  entries.push_back({"separation gain on concentric circles", criterion_separation(sep)});
  entries.push_back({"random-monomial baseline gap", criterion_random_baseline(sep)});
  entries.push_back({"oavi feasibility grid", criterion_oavi_feasibility()});
  entries.push_back({"inclusion-exclusion equivalence", criterion_inex_equivalence()});
  Verdict pruning = criterion_pruning(encoded);
  entries.push_back({"theory norm bounds and kappa identity",
                     criterion_theory_bounds(sep, encoded)});
  entries.push_back({"pruning monomial shrinkage", pruning});
  entries.push_back({"determinism of fit and eval artifacts", criterion_determinism()});
  entries.push_back({"solver cross-check on l1 least squares", criterion_solver_crosscheck()});

  bool all = true;
  for (size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    all = all && e.verdict.pass;
    std::printf("[%s] %zu. %s - %s\n", e.verdict.pass ? "PASS" : "FAIL", i + 1,
                e.name.c_str(), e.verdict.detail.c_str());
  }
  std::printf("%s\n", all ? "ALL ACCEPTANCE CRITERIA PASSED" : "ACCEPTANCE FAILURES PRESENT");
  return all ? 0 : 1;
}
