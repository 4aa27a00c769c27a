#pragma once

// Versioned JSON serialization of trained models.  Bundles are deterministic:
// sorted keys, shortest round-trip doubles, and no wall-clock measurements.

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "vinet/avinn.hpp"
#include "vinet/errors.hpp"
#include "vinet/features.hpp"
#include "vinet/poly.hpp"
#include "vinet/vanishing.hpp"

namespace vinet::bundle {

inline constexpr int kBundleVersion = 1;

namespace detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw DataError("bundle: " + what + " must be a nonempty array");
  Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw DataError("bundle: ragged rows in " + what);
    for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = row.at(c).get<double>();
  }
  return M;
}

inline nlohmann::json row_vector_json(const Eigen::RowVectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Eigen::RowVectorXd row_vector_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw DataError("bundle: " + what + " must be an array");
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

inline nlohmann::json monomial_json(const Monomial& m) {
  return nlohmann::json(m.exponents);
}

inline nlohmann::json polynomial_json(const Polynomial& p, const MonomialBasis& basis) {
  nlohmann::json terms = nlohmann::json::array();
  for (const Term& t : p.terms())
    terms.push_back({{"exponents", basis.at(t.monomial).exponents},
                     {"coefficient", t.coefficient}});
  return terms;
}

}  // namespace detail

// Write content to path via a temp file and rename, creating parent
// directories as needed.
inline void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + tmp.string());
    out << content;
    if (!out.flush()) throw DataError("failed writing file: " + tmp.string());
  }
  fs::rename(tmp, p, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " to " + path + ": " + ec.message());
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json layer_json(const avinn::PolynomialLayer& layer) {
  nlohmann::json monomials = nlohmann::json::array();
  for (int j = 0; j < layer.basis.size(); ++j)
    monomials.push_back(detail::monomial_json(layer.basis.at(j)));
  return {{"vars", layer.basis.vars()},
          {"monomials", std::move(monomials)},
          {"coefficients", detail::matrix_json(layer.coefficients)},
          {"class_offsets", layer.class_offsets}};
}

inline avinn::PolynomialLayer layer_from_json(const nlohmann::json& j) {
  int vars = j.at("vars").get<int>();
  std::vector<Monomial> ms;
  for (const auto& e : j.at("monomials")) ms.push_back(Monomial(e.get<std::vector<int>>()));
  avinn::PolynomialLayer layer(vars);
  layer.basis = MonomialBasis::from_monomials(vars, ms);
  // Columns were stored in basis order; reject any reordering or duplicates.
  for (size_t k = 0; k < ms.size(); ++k)
    if (layer.basis.index_of(ms[k]) != static_cast<int>(k))
      throw DataError("bundle: layer monomials are not in canonical order");
  layer.coefficients = detail::matrix_from_json(j.at("coefficients"), "layer coefficients");
  if (layer.coefficients.cols() != layer.basis.size())
    throw DataError("bundle: layer coefficient width does not match the basis");
  layer.class_offsets = j.at("class_offsets").get<std::vector<int>>();
  if (layer.class_offsets.empty() ||
      layer.class_offsets.back() != layer.coefficients.rows())
    throw DataError("bundle: layer class offsets do not partition the rows");
  return layer;
}

inline nlohmann::json classifier_json(const avinn::Classifier& c) {
  nlohmann::json j;
  j["kind"] = c.kind;
  j["classes"] = c.classes;
  j["pca"] = c.pca ? nlohmann::json{{"mean", detail::row_vector_json(c.pca->mean)},
                                    {"components", detail::matrix_json(c.pca->components)}}
                   : nlohmann::json();
  j["rescale"] = c.rescale
                     ? nlohmann::json{{"mu", detail::row_vector_json(c.rescale->mu)},
                                      {"sigma", detail::row_vector_json(c.rescale->sigma)}}
                     : nlohmann::json();
  j["layer"] = c.layer ? layer_json(*c.layer) : nlohmann::json();
  j["head"] = {{"W", detail::matrix_json(c.head.W)},
               {"bias", detail::row_vector_json(c.head.bias.transpose())}};
  return j;
}

inline avinn::Classifier classifier_from_json(const nlohmann::json& j) {
  avinn::Classifier c;
  c.kind = j.at("kind").get<std::string>();
  c.classes = j.at("classes").get<int>();
  if (c.classes < 2) throw DataError("bundle: needs at least two classes");
  if (!j.at("pca").is_null()) {
    features::PcaMap pca;
    pca.mean = detail::row_vector_from_json(j.at("pca").at("mean"), "pca mean");
    pca.components = detail::matrix_from_json(j.at("pca").at("components"), "pca components");
    c.pca = std::move(pca);
  }
  if (!j.at("rescale").is_null()) {
    features::RescaleMap map;
    map.mu = detail::row_vector_from_json(j.at("rescale").at("mu"), "rescale mu");
    map.sigma = detail::row_vector_from_json(j.at("rescale").at("sigma"), "rescale sigma");
    c.rescale = std::move(map);
  }
  if (!j.at("layer").is_null()) c.layer = layer_from_json(j.at("layer"));
  c.head.W = detail::matrix_from_json(j.at("head").at("W"), "head W");
  c.head.bias = detail::row_vector_from_json(j.at("head").at("bias"), "head bias").transpose();
  if (c.head.bias.size() != c.head.W.rows())
    throw DataError("bundle: head bias length does not match W");
  return c;
}

// Per-class generator listing for inspection; construction timing is
// deliberately omitted so bundles stay byte-reproducible.
inline nlohmann::json generator_sets_json(const std::vector<vanishing::GeneratorSet>& sets) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& g : sets) {
    nlohmann::json ideal = nlohmann::json::array();
    for (int idx : g.order_ideal.members())
      ideal.push_back(detail::monomial_json(g.basis.at(idx)));
    nlohmann::json gens = nlohmann::json::array();
    for (const auto& p : g.generators)
      gens.push_back(detail::polynomial_json(p, g.basis));
    out.push_back({{"class", g.class_label},
                   {"order_ideal", std::move(ideal)},
                   {"generators", std::move(gens)},
                   {"stats",
                    {{"monomials", g.stats.monomials},
                     {"polynomials", g.stats.polynomials},
                     {"skipped_candidates", g.stats.skipped_candidates}}}});
  }
  return out;
}

inline void save_bundle(const std::string& path, const avinn::Classifier& c,
                        const std::vector<vanishing::GeneratorSet>* sets,
                        const nlohmann::json& config_echo) {
  nlohmann::json j = classifier_json(c);
  j["format"] = "vinet-bundle";
  j["version"] = kBundleVersion;
  j["config"] = config_echo;
  j["generators"] = sets ? generator_sets_json(*sets) : nlohmann::json();
  write_text_atomic(path, j.dump(2) + "\n");
}

inline nlohmann::json load_bundle_json(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid bundle: " + e.what());
  }
  try {
    if (j.at("format") != "vinet-bundle") throw DataError(path + ": not a model bundle");
    if (j.at("version").get<int>() != kBundleVersion)
      throw DataError(path + ": unsupported bundle version");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid bundle: " + e.what());
  }
  return j;
}

inline avinn::Classifier load_bundle(const std::string& path) {
  nlohmann::json j = load_bundle_json(path);
  try {
    return classifier_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid bundle: " + e.what());
  }
}

}  // namespace vinet::bundle
