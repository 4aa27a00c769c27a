#pragma once

// Command-line front end: synth / fit / eval / complexity / baseline.
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
// failure.  All file outputs are deterministic for a fixed config; timing
// goes to stderr only.

#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "vinet/avinn.hpp"
#include "vinet/bundle.hpp"
#include "vinet/errors.hpp"
#include "vinet/features.hpp"
#include "vinet/spectral.hpp"
#include "vinet/vanishing.hpp"

namespace vinet::cli {

namespace detail {

struct SynthOpts {
  std::string shapes;
  int per_class = 100;
  double noise = 0.0;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  std::string out;
};

struct FitOpts {
  std::string data, out;
  std::string algorithm = "abm";
  double psi = 0.1;
  double tau = 10.0;
  int max_degree = 5;
  int pca_dims = 128;
  bool no_rescale = false;
  double keep_fraction = 1.0;
  int subsample = 512;
  double lr = 0.05;
  double momentum = 0.9;
  int epochs = 20;
  int batch = 64;
  bool finetune = false;
  std::uint64_t seed = 0;
};

struct EvalOpts {
  std::string bundle, data, out, csv;
  std::string split = "test";
};

struct ComplexityOpts {
  std::string bundle, out, data;
  std::string split = "test";
  double margin = 0.1;
  double delta = 0.05;
  double declared_tau = -1.0;  // negative: use the measured row budget
};

struct BaselineOpts {
  std::string kind, data, out, reference;
  int degree_cap = 5;
  int pca_dims = 128;
  bool no_rescale = false;
  double lr = 0.05;
  double momentum = 0.9;
  int epochs = 20;
  int batch = 64;
  bool finetune = false;
  std::uint64_t seed = 0;
};

inline features::SynthSpec parse_shapes(const std::string& text, int per_class,
                                        double noise) {
  features::SynthSpec spec;
  spec.per_class = per_class;
  spec.noise = noise;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    if (token.empty()) throw ConfigError("synth: empty shape token");
    auto colon = token.find(':');
    features::Shape s;
    s.kind = token.substr(0, colon);
    s.scale = 1.0;
    if (colon != std::string::npos) {
      try {
        size_t used = 0;
        s.scale = std::stod(token.substr(colon + 1), &used);
        if (used != token.size() - colon - 1) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("synth: bad shape scale in '" + token + "'");
      }
    }
    spec.shapes.push_back(s);
  }
  if (spec.shapes.empty()) throw ConfigError("synth: no shapes given");
  return spec;
}

inline void cmd_synth(const SynthOpts& o) {
  if (o.per_class < 1) throw ConfigError("synth: --per-class must be positive");
  if (o.noise < 0.0) throw ConfigError("synth: --noise must be nonnegative");
  if (!(o.test_fraction >= 0.0 && o.test_fraction < 1.0))
    throw ConfigError("synth: --test-fraction must lie in [0, 1)");
  features::SynthSpec spec = parse_shapes(o.shapes, o.per_class, o.noise);
  features::Dataset d = features::synth_manifolds(spec, o.seed, "synth");
  int n_test = static_cast<int>(std::lround(o.test_fraction * o.per_class));
  n_test = std::min(n_test, o.per_class - 1);
  d.split.assign(d.rows(), "train");
  for (size_t k = 0; k < spec.shapes.size(); ++k) {
    int begin = static_cast<int>(k) * o.per_class;
    for (int i = o.per_class - n_test; i < o.per_class; ++i)
      d.split[begin + i] = "test";
  }
  std::string tmp = o.out + ".tmp";
  features::write_dataset_csv(d, tmp);
  std::error_code ec;
  std::filesystem::rename(tmp, o.out, ec);
  if (ec) throw DataError("synth: cannot move output into place: " + ec.message());
  std::cerr << "synth: wrote " << d.rows() << " rows to " << o.out << "\n";
}

// Rows tagged "train" when a split column exists; the whole file otherwise.
inline features::Dataset train_portion(const features::Dataset& d) {
  if (!d.has_split()) return d;
  features::Dataset t = d.subset_by_split("train");
  if (t.rows() == 0) throw DataError("dataset has no training rows");
  return t;
}

inline features::Dataset eval_portion(const features::Dataset& d, const std::string& tag) {
  return d.has_split() ? d.subset_by_split(tag) : d;
}

struct Preprocess {
  std::optional<features::PcaMap> pca;
  std::optional<features::RescaleMap> rescale;
};

// PCA applies only when a positive dimension no larger than the data width is
// requested; tanh rescaling is fitted on the (possibly projected) points.
inline Preprocess fit_preprocess(const PointSet& X, int pca_dims, bool rescale) {
  if (pca_dims < 0) throw ConfigError("--pca-dims must be nonnegative");
  Preprocess p;
  PointSet Z = X;
  if (pca_dims >= 1 && pca_dims <= X.cols()) {
    p.pca = features::fit_pca(X, pca_dims);
    Z = features::apply_pca(*p.pca, Z);
  }
  if (rescale) p.rescale = features::fit_tanh(Z);
  return p;
}

inline PointSet apply_preprocess(const Preprocess& p, const PointSet& X) {
  PointSet Z = X;
  if (p.pca) Z = features::apply_pca(*p.pca, Z);
  if (p.rescale) Z = features::apply_tanh(*p.rescale, Z);
  return Z;
}

inline void validate_training(double lr, double momentum, int epochs, int batch) {
  if (lr < 0.0) throw ConfigError("--lr must be nonnegative");
  if (momentum < 0.0) throw ConfigError("--momentum must be nonnegative");
  if (epochs < 1) throw ConfigError("--epochs must be positive");
  if (batch < 1) throw ConfigError("--batch must be positive");
}

inline void cmd_fit(const FitOpts& o) {
  auto alg = vanishing::algorithm_from_name(o.algorithm);
  if (!alg) throw ConfigError("fit: unknown algorithm '" + o.algorithm + "'");
  if (!(o.keep_fraction >= 0.0 && o.keep_fraction <= 1.0))
    throw ConfigError("fit: --keep-fraction must lie in [0, 1]");
  if (o.subsample < 0) throw ConfigError("fit: --subsample must be nonnegative");
  validate_training(o.lr, o.momentum, o.epochs, o.batch);

  vanishing::VanishConfig vc;
  vc.algorithm = *alg;
  vc.psi = o.psi;
  vc.tau = o.tau;
  vc.max_degree = o.max_degree;
  if (o.subsample > 0) vc.subsample = o.subsample;
  vc.seed = o.seed;
  // Reject bad psi/tau/degree before loading or computing anything.
  vanishing::detail::validate_config(vc, vc.algorithm != vanishing::Algorithm::abm);

  features::Dataset all = features::load_dataset(o.data);
  features::Dataset train = train_portion(all);

  auto t0 = std::chrono::steady_clock::now();
  Preprocess prep = fit_preprocess(train.points, o.pca_dims, !o.no_rescale);
  features::Dataset pre = train;
  pre.points = apply_preprocess(prep, train.points);

  auto sets = avinn::fit_class_generators(pre, vc);
  if (o.keep_fraction < 1.0) {
    std::vector<PointSet> per_class;
    for (int k = 0; k < pre.classes(); ++k)
      per_class.push_back(pre.subset_by_label(k).points);
    auto report = avinn::prune(sets, o.keep_fraction, per_class);
    std::cerr << "prune: shared monomials " << report.monomials_before << " -> "
              << report.monomials_after << "\n";
  }

  avinn::Classifier model;
  model.kind = "avinn";
  model.classes = pre.classes();
  model.pca = prep.pca;
  model.rescale = prep.rescale;
  model.layer = avinn::build_layer(sets);

  avinn::TrainOptions topts;
  topts.lr = o.lr;
  topts.momentum = o.momentum;
  topts.epochs = o.epochs;
  topts.batch = o.batch;
  topts.seed = o.seed;
  topts.finetune_coefficients = o.finetune;
  auto stats = avinn::train_head(model, train.points, train.labels, topts);
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::cerr << "class  monomials  polynomials  seconds\n";
  for (const auto& g : sets) {
    char line[128];
    std::snprintf(line, sizeof line, "%-6d %-10d %-12d %.3f\n", g.class_label,
                  g.stats.monomials, g.stats.polynomials, g.stats.seconds);
    std::cerr << line;
  }
  std::cerr << "final training loss " << stats.epoch_loss.back() << ", train accuracy "
            << avinn::accuracy(model, train.points, train.labels) << ", total "
            << seconds << "s\n";

  nlohmann::json echo{{"command", "fit"},
                      {"algorithm", o.algorithm},
                      {"psi", o.psi},
                      {"tau", o.tau},
                      {"max_degree", o.max_degree},
                      {"pca_dims", o.pca_dims},
                      {"rescale", !o.no_rescale},
                      {"keep_fraction", o.keep_fraction},
                      {"subsample", o.subsample},
                      {"lr", o.lr},
                      {"momentum", o.momentum},
                      {"epochs", o.epochs},
                      {"batch", o.batch},
                      {"finetune_coeffs", o.finetune},
                      {"seed", o.seed}};
  bundle::save_bundle(o.out, model, &sets, echo);
  std::cerr << "fit: wrote " << o.out << "\n";
}

inline void cmd_eval(const EvalOpts& o) {
  avinn::Classifier model = bundle::load_bundle(o.bundle);
  features::Dataset all = features::load_dataset(o.data);
  features::Dataset part = eval_portion(all, o.split);
  if (part.rows() == 0) throw DataError("eval: no rows in split '" + o.split + "'");
  for (int l : part.labels)
    if (l >= model.classes)
      throw DataError("eval: label " + std::to_string(l) +
                      " outside the model's " + std::to_string(model.classes) + " classes");

  auto t0 = std::chrono::steady_clock::now();
  std::vector<int> pred = avinn::predict(model, part.points);
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  int k = model.classes;
  std::vector<std::vector<int>> confusion(k, std::vector<int>(k, 0));
  std::vector<int> per_rows(k, 0), per_correct(k, 0);
  int correct = 0;
  for (int i = 0; i < part.rows(); ++i) {
    confusion[part.labels[i]][pred[i]] += 1;
    per_rows[part.labels[i]] += 1;
    if (pred[i] == part.labels[i]) {
      ++correct;
      ++per_correct[part.labels[i]];
    }
  }
  double acc = static_cast<double>(correct) / part.rows();

  nlohmann::json per_class = nlohmann::json::array();
  for (int c = 0; c < k; ++c)
    per_class.push_back(per_rows[c] == 0
                            ? nlohmann::json()
                            : nlohmann::json(static_cast<double>(per_correct[c]) / per_rows[c]));

  std::cout << "accuracy " << acc << " (" << correct << "/" << part.rows() << ")\n";
  std::cerr << "eval: " << part.rows() / std::max(seconds, 1e-12) << " rows/s\n";

  if (!o.out.empty()) {
    nlohmann::json m{{"format", "vinet-metrics"},
                     {"version", 1},
                     {"rows", part.rows()},
                     {"accuracy", acc},
                     {"per_class_accuracy", per_class},
                     {"confusion", confusion}};
    bundle::write_text_atomic(o.out, m.dump(2) + "\n");
  }
  if (!o.csv.empty()) {
    std::ostringstream csv;
    csv << "class,rows,accuracy\n";
    for (int c = 0; c < k; ++c) {
      csv << c << ',' << per_rows[c] << ',';
      if (per_rows[c] > 0)
        csv << features::detail::format_double(static_cast<double>(per_correct[c]) / per_rows[c]);
      csv << '\n';
    }
    bundle::write_text_atomic(o.csv, csv.str());
  }
}

inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
}

inline void cmd_complexity(const ComplexityOpts& o) {
  if (!(o.delta > 0.0 && o.delta < 1.0))
    throw ConfigError("complexity: --delta must lie in (0, 1)");
  if (!(o.margin > 0.0)) throw ConfigError("complexity: --margin must be positive");

  avinn::Classifier model = bundle::load_bundle(o.bundle);
  if (!model.layer)
    throw ConfigError("complexity: bundle '" + o.bundle + "' has no polynomial layer");
  spectral::EncodedLayer enc = spectral::encode_layer(*model.layer);
  std::optional<double> declared;
  if (o.declared_tau >= 0.0) declared = o.declared_tau;
  spectral::SpectralReport rep = spectral::theorem_report({}, enc, model.head.W, declared);

  nlohmann::json margin_section;
  if (!o.data.empty()) {
    features::Dataset all = features::load_dataset(o.data);
    features::Dataset part = eval_portion(all, o.split);
    rep.margin = o.margin;
    rep.margin_loss_value = spectral::margin_loss(model, part, o.margin);
    double data_norm = part.points.norm();
    double bound = spectral::generalization_bound(rep, data_norm, part.rows(), o.delta);
    margin_section = {{"gamma", o.margin},       {"loss", rep.margin_loss_value},
                      {"data_norm", data_norm},  {"rows", part.rows()},
                      {"delta", o.delta},        {"bound", bound}};
  }

  nlohmann::json j{{"format", "vinet-complexity"},
                   {"version", 1},
                   {"degree", rep.degree},
                   {"n_polynomials", rep.n_polynomials},
                   {"n_monomials", rep.n_monomials},
                   {"tau", rep.tau},
                   {"lambda1", rep.lambda1},
                   {"lambda2", rep.lambda2},
                   {"spectral_norms", rep.spectral_norms},
                   {"two_one_norms", rep.two_one_norms},
                   {"rhos", rep.rhos},
                   {"r_phi", finite_or_null(rep.r_phi)},
                   {"r_avinn", rep.r_avinn},
                   {"kappa", finite_or_null(rep.kappa)},
                   {"kappa_ok", rep.kappa_ok},
                   {"measured_product", rep.measured_product},
                   {"bound_product", rep.bound_product},
                   {"product_ok", rep.product_ok},
                   {"measured_sum", rep.measured_sum},
                   {"bound_sum", rep.bound_sum},
                   {"sum_ok", rep.sum_ok},
                   {"width", rep.width},
                   {"margin", margin_section}};
  bundle::write_text_atomic(o.out, j.dump(2) + "\n");
  std::cerr << "complexity: product " << rep.measured_product << " <= " << rep.bound_product
            << (rep.product_ok ? " ok" : " VIOLATED") << "; sum " << rep.measured_sum
            << " <= " << rep.bound_sum << (rep.sum_ok ? " ok" : " VIOLATED") << "\n";
}

inline void cmd_baseline(const BaselineOpts& o) {
  if (o.kind != "linear" && o.kind != "random-monomials")
    throw ConfigError("baseline: --kind must be 'linear' or 'random-monomials'");
  validate_training(o.lr, o.momentum, o.epochs, o.batch);

  features::Dataset all = features::load_dataset(o.data);
  features::Dataset train = train_portion(all);

  avinn::Classifier model;
  model.kind = o.kind;
  if (o.kind == "linear") {
    Preprocess prep = fit_preprocess(train.points, o.pca_dims, !o.no_rescale);
    model.pca = prep.pca;
    model.rescale = prep.rescale;
    model.classes = train.classes();
  } else {
    if (o.reference.empty())
      throw ConfigError("baseline: random-monomials needs --reference for shape matching");
    if (o.degree_cap < 1) throw ConfigError("baseline: --degree-cap must be positive");
    avinn::Classifier ref = bundle::load_bundle(o.reference);
    if (!ref.layer)
      throw ConfigError("baseline: reference bundle has no polynomial layer");
    model.layer = avinn::random_monomial_layer(ref.layer->basis.vars(),
                                               ref.layer->polynomials(),
                                               ref.layer->monomials(), o.degree_cap, o.seed);
    model.pca = ref.pca;
    model.rescale = ref.rescale;
    model.classes = ref.classes;
  }

  avinn::TrainOptions topts;
  topts.lr = o.lr;
  topts.momentum = o.momentum;
  topts.epochs = o.epochs;
  topts.batch = o.batch;
  topts.seed = o.seed;
  topts.finetune_coefficients = o.finetune;
  auto stats = avinn::train_head(model, train.points, train.labels, topts);
  std::cerr << "baseline " << o.kind << ": final training loss " << stats.epoch_loss.back()
            << ", train accuracy "
            << avinn::accuracy(model, train.points, train.labels) << "\n";

  nlohmann::json echo{{"command", "baseline"}, {"kind", o.kind},
                      {"degree_cap", o.degree_cap}, {"pca_dims", o.pca_dims},
                      {"rescale", !o.no_rescale},   {"lr", o.lr},
                      {"momentum", o.momentum},     {"epochs", o.epochs},
                      {"batch", o.batch},           {"finetune_coeffs", o.finetune},
                      {"reference", o.reference},   {"seed", o.seed}};
  bundle::save_bundle(o.out, model, nullptr, echo);
  std::cerr << "baseline: wrote " << o.out << "\n";
}

}  // namespace detail

// Parse and dispatch.  Returns the process exit code instead of calling exit
// so tests can drive the CLI in-process.
inline int run(const std::vector<std::string>& args) {
  CLI::App app{"approximate vanishing ideals, polynomial-feature classifiers, "
               "and spectral capacity reports"};
  app.name("vinet");
  app.require_subcommand(1);

  detail::SynthOpts so;
  CLI::App* synth = app.add_subcommand("synth", "generate a labeled synthetic dataset");
  synth->add_option("--shapes", so.shapes, "comma list of kind:scale, e.g. circle:0.9,circle:0.45")
      ->required();
  synth->add_option("--per-class", so.per_class, "points per class");
  synth->add_option("--noise", so.noise, "Gaussian noise level");
  synth->add_option("--test-fraction", so.test_fraction, "fraction tagged as test split");
  synth->add_option("--seed", so.seed, "random seed")->required();
  synth->add_option("--out", so.out, "output dataset path")->required();

  detail::FitOpts fo;
  CLI::App* fit = app.add_subcommand("fit", "train a polynomial-feature classifier");
  fit->add_option("--data", fo.data, "dataset path")->required();
  fit->add_option("--out", fo.out, "bundle output path")->required();
  fit->add_option("--algorithm", fo.algorithm, "abm | oavi-fw | oavi-agd");
  fit->add_option("--psi", fo.psi, "vanishing tolerance");
  fit->add_option("--tau", fo.tau, "coefficient budget (oavi)");
  fit->add_option("--max-degree", fo.max_degree, "maximum monomial degree");
  fit->add_option("--pca-dims", fo.pca_dims, "PCA dimensions (0 disables)");
  fit->add_flag("--no-rescale", fo.no_rescale, "skip tanh rescaling");
  fit->add_option("--keep-fraction", fo.keep_fraction, "generator keep fraction");
  fit->add_option("--subsample", fo.subsample, "per-class row cap (0 disables)");
  fit->add_option("--lr", fo.lr, "head learning rate");
  fit->add_option("--momentum", fo.momentum, "head momentum");
  fit->add_option("--epochs", fo.epochs, "training epochs");
  fit->add_option("--batch", fo.batch, "mini-batch size");
  fit->add_flag("--finetune-coeffs", fo.finetune, "also train layer coefficients");
  fit->add_option("--seed", fo.seed, "random seed")->required();

  detail::EvalOpts eo;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a bundle on a dataset");
  eval->add_option("--bundle", eo.bundle, "model bundle path")->required();
  eval->add_option("--data", eo.data, "dataset path")->required();
  eval->add_option("--split", eo.split, "split tag to evaluate (default test)");
  eval->add_option("--out", eo.out, "metrics output path");
  eval->add_option("--csv", eo.csv, "per-class accuracy CSV path");

  detail::ComplexityOpts co;
  CLI::App* complexity = app.add_subcommand("complexity", "spectral capacity report");
  complexity->add_option("--bundle", co.bundle, "model bundle path")->required();
  complexity->add_option("--out", co.out, "report output path")->required();
  complexity->add_option("--data", co.data, "dataset for the margin section");
  complexity->add_option("--split", co.split, "split tag (default test)");
  complexity->add_option("--margin", co.margin, "margin gamma");
  complexity->add_option("--delta", co.delta, "confidence parameter");
  complexity->add_option("--tau", co.declared_tau, "declared coefficient budget");

  detail::BaselineOpts bo;
  CLI::App* baseline = app.add_subcommand("baseline", "train a control model");
  baseline->add_option("--kind", bo.kind, "linear | random-monomials")->required();
  baseline->add_option("--data", bo.data, "dataset path")->required();
  baseline->add_option("--out", bo.out, "bundle output path")->required();
  baseline->add_option("--reference", bo.reference, "bundle to shape-match (random-monomials)");
  baseline->add_option("--degree-cap", bo.degree_cap, "max random monomial degree");
  baseline->add_option("--pca-dims", bo.pca_dims, "PCA dimensions (0 disables)");
  baseline->add_flag("--no-rescale", bo.no_rescale, "skip tanh rescaling");
  baseline->add_option("--lr", bo.lr, "head learning rate");
  baseline->add_option("--momentum", bo.momentum, "head momentum");
  baseline->add_option("--epochs", bo.epochs, "training epochs");
  baseline->add_option("--batch", bo.batch, "mini-batch size");
  baseline->add_flag("--finetune-coeffs", bo.finetune, "also train layer coefficients");
  baseline->add_option("--seed", bo.seed, "random seed")->required();

  std::vector<const char*> argv;
  argv.push_back("vinet");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) detail::cmd_synth(so);
    if (fit->parsed()) detail::cmd_fit(fo);
    if (eval->parsed()) detail::cmd_eval(eo);
    if (complexity->parsed()) detail::cmd_complexity(co);
    if (baseline->parsed()) detail::cmd_baseline(bo);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace vinet::cli
