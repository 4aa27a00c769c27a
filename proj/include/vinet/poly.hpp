#ifndef VINET_POLY_HPP
#define VINET_POLY_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "vinet/errors.hpp"

namespace vinet {

// Rows are points, columns are variables.
using PointSet = Eigen::MatrixXd;

// A monomial over a fixed variable count, stored as its exponent vector.
struct Monomial {
  std::vector<int> exponents;

  Monomial() = default;
  explicit Monomial(std::vector<int> e) : exponents(std::move(e)) {
    for (int x : exponents)
      if (x < 0) throw ConfigError("monomial exponents must be nonnegative");
  }

  int vars() const { return static_cast<int>(exponents.size()); }

  int degree() const {
    int d = 0;
    for (int x : exponents) d += x;
    return d;
  }

  bool is_constant() const { return degree() == 0; }

  // Componentwise <= over equal-length exponent vectors.
  bool divides(const Monomial& other) const {
    if (vars() != other.vars()) throw ConfigError("divides: variable count mismatch");
    for (int i = 0; i < vars(); ++i)
      if (exponents[i] > other.exponents[i]) return false;
    return true;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.exponents == b.exponents;
  }
};

// Degree-lexicographic order: total degree first; within a degree the
// monomial with the larger exponent on the earliest differing variable comes
// first.  Hence x < y, and x^2 < xy < y^2.
inline int compare(const Monomial& a, const Monomial& b) {
  if (a.vars() != b.vars()) throw ConfigError("compare: variable count mismatch");
  int da = a.degree(), db = b.degree();
  if (da != db) return da < db ? -1 : 1;
  for (int i = 0; i < a.vars(); ++i) {
    if (a.exponents[i] != b.exponents[i])
      return a.exponents[i] > b.exponents[i] ? -1 : 1;
  }
  return 0;
}

inline bool operator<(const Monomial& a, const Monomial& b) { return compare(a, b) < 0; }

// An ordered monomial set with bijective index lookup.  Indices are append
// order, and appends must keep the sequence strictly increasing, so index
// order and term order coincide.
class MonomialBasis {
 public:
  explicit MonomialBasis(int vars) : vars_(vars) {
    if (vars <= 0) throw ConfigError("basis needs at least one variable");
  }

  int vars() const { return vars_; }
  int size() const { return static_cast<int>(items_.size()); }

  const Monomial& at(int i) const { return items_.at(i); }

  int index_of(const Monomial& m) const {
    auto it = index_.find(m.exponents);
    return it == index_.end() ? -1 : it->second;
  }

  int append(const Monomial& m) {
    if (m.vars() != vars_) throw ConfigError("append: variable count mismatch");
    if (!items_.empty() && compare(items_.back(), m) >= 0)
      throw ConfigError("append: basis must stay strictly increasing");
    items_.push_back(m);
    index_[m.exponents] = size() - 1;
    return size() - 1;
  }

  static MonomialBasis from_monomials(int vars, std::vector<Monomial> ms) {
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    MonomialBasis basis(vars);
    for (auto& m : ms) basis.append(m);
    return basis;
  }

 private:
  int vars_;
  std::vector<Monomial> items_;
  std::map<std::vector<int>, int> index_;
};

// One coefficient on one basis index.
struct Term {
  double coefficient = 0.0;
  int monomial = -1;
};

// A polynomial over some MonomialBasis.  Terms are kept sorted by ascending
// basis index with duplicates merged and exact zeros dropped, so the last
// term is the leading one under the module ordering.
class Polynomial {
 public:
  Polynomial() = default;

  explicit Polynomial(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.monomial < b.monomial; });
    for (const Term& t : terms) {
      if (t.monomial < 0) throw ConfigError("polynomial term without a basis index");
      if (!terms_.empty() && terms_.back().monomial == t.monomial)
        terms_.back().coefficient += t.coefficient;
      else
        terms_.push_back(t);
    }
    terms_.erase(std::remove_if(terms_.begin(), terms_.end(),
                                [](const Term& t) { return t.coefficient == 0.0; }),
                 terms_.end());
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  int leading_index() const {
    if (terms_.empty()) throw ConfigError("leading term of the zero polynomial");
    return terms_.back().monomial;
  }

  double leading_coefficient() const {
    if (terms_.empty()) throw ConfigError("leading term of the zero polynomial");
    return terms_.back().coefficient;
  }

 private:
  std::vector<Term> terms_;
};

// Evaluate a monomial at one point (any Eigen vector-like expression).
template <typename Derived>
double eval(const Monomial& m, const Eigen::MatrixBase<Derived>& z) {
  if (z.size() != m.vars()) throw ConfigError("eval: point dimension mismatch");
  double v = 1.0;
  for (int i = 0; i < m.vars(); ++i) {
    double zi = z(i);
    for (int k = 0; k < m.exponents[i]; ++k) v *= zi;
  }
  return v;
}

// Column of monomial evaluations over the rows of Z.
inline Eigen::VectorXd eval_column(const Monomial& m, const PointSet& Z) {
  if (Z.cols() != m.vars()) throw ConfigError("eval_column: point dimension mismatch");
  Eigen::VectorXd v = Eigen::VectorXd::Ones(Z.rows());
  for (int i = 0; i < m.vars(); ++i)
    for (int k = 0; k < m.exponents[i]; ++k) v.array() *= Z.col(i).array();
  return v;
}

template <typename Derived>
double eval(const Polynomial& p, const MonomialBasis& basis,
            const Eigen::MatrixBase<Derived>& z) {
  double v = 0.0;
  for (const Term& t : p.terms()) v += t.coefficient * eval(basis.at(t.monomial), z);
  return v;
}

inline Eigen::VectorXd eval_column(const Polynomial& p, const MonomialBasis& basis,
                                   const PointSet& Z) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Z.rows());
  for (const Term& t : p.terms())
    v += t.coefficient * eval_column(basis.at(t.monomial), Z);
  return v;
}

// Mean squared evaluation over a point set; zero exactly when p vanishes on Z.
inline double mse(const Polynomial& p, const MonomialBasis& basis, const PointSet& Z) {
  if (Z.rows() == 0) throw ConfigError("mse over an empty point set");
  return eval_column(p, basis, Z).squaredNorm() / static_cast<double>(Z.rows());
}

// A division-closed monomial set, stored as indices into a shared basis.
class OrderIdeal {
 public:
  void insert(int idx) {
    if (idx < 0) throw ConfigError("order ideal: negative index");
    if (members_set_.insert(idx).second) members_.push_back(idx);
  }

  bool contains(int idx) const { return members_set_.count(idx) > 0; }
  int size() const { return static_cast<int>(members_.size()); }

  // Insertion order (the algorithms append in increasing term order).
  const std::vector<int>& members() const { return members_; }

  // Every divisor of every member must itself be a member.
  bool is_closed(const MonomialBasis& basis) const {
    for (int idx : members_) {
      const Monomial& m = basis.at(idx);
      std::vector<int> e(m.vars(), 0);
      // Odometer over all exponent vectors <= m.
      while (true) {
        int j = basis.index_of(Monomial(e));
        if (j == -1 || !contains(j)) return false;
        int v = 0;
        while (v < m.vars()) {
          if (e[v] < m.exponents[v]) {
            ++e[v];
            break;
          }
          e[v] = 0;
          ++v;
        }
        if (v == m.vars()) break;
      }
    }
    return true;
  }

 private:
  std::vector<int> members_;
  std::set<int> members_set_;
};

namespace detail {
inline void degree_slices(int vars, int degree, std::vector<int>& cur,
                          std::vector<Monomial>& out) {
  if (static_cast<int>(cur.size()) == vars - 1) {
    int used = 0;
    for (int e : cur) used += e;
    std::vector<int> full = cur;
    full.push_back(degree - used);
    out.push_back(Monomial(std::move(full)));
    return;
  }
  int used = 0;
  for (int e : cur) used += e;
  for (int e = degree - used; e >= 0; --e) {  // larger early exponents first
    cur.push_back(e);
    degree_slices(vars, degree, cur, out);
    cur.pop_back();
  }
}
}  // namespace detail

// All monomials of exact total degree, already in increasing term order.
inline std::vector<Monomial> monomials_of_degree(int vars, int degree) {
  if (vars <= 0) throw ConfigError("monomials_of_degree: no variables");
  if (degree < 0) throw ConfigError("monomials_of_degree: negative degree");
  std::vector<Monomial> out;
  std::vector<int> cur;
  detail::degree_slices(vars, degree, cur, out);
  return out;
}

// Degree-d border: monomials of exact degree d outside the ideal that have a
// divisor (other than themselves) inside it.  Since the constant monomial
// belongs to every nonempty order ideal, this is in practice the whole
// degree-d level minus the ideal.  Returned sorted in term order.
inline std::vector<Monomial> border(const OrderIdeal& ideal, const MonomialBasis& basis,
                                    int degree, int vars) {
  if (degree < 1) throw ConfigError("border: degree must be at least 1");
  std::vector<Monomial> out;
  for (Monomial& u : monomials_of_degree(vars, degree)) {
    int idx = basis.index_of(u);
    if (idx != -1 && ideal.contains(idx)) continue;
    bool has_divisor = false;
    for (int t : ideal.members()) {
      const Monomial& tm = basis.at(t);
      if (!(tm == u) && tm.divides(u)) {
        has_divisor = true;
        break;
      }
    }
    if (has_divisor) out.push_back(std::move(u));
  }
  return out;
}

}  // namespace vinet

#endif  // VINET_POLY_HPP
