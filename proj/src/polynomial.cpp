#include "popmc/polynomial.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace popmc {

int degree(const Monomial& m) { return std::accumulate(m.begin(), m.end(), 0); }

Polynomial Polynomial::constant(std::size_t nvars, double c) {
  Polynomial p(nvars);
  p.add_term(Monomial(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t index) {
  Polynomial p(nvars);
  Monomial m(nvars, 0);
  m.at(index) = 1;
  p.add_term(m, 1.0);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, popmc::degree(m));
  return d;
}

int Polynomial::degree_in(std::size_t var) const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m[var]);
  return d;
}

void Polynomial::add_term(const Monomial& m, double c) {
  if (m.size() != nvars_) throw std::invalid_argument("monomial arity mismatch");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  if (r.nvars_ == 0) r.nvars_ = o.nvars_;
  for (const auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial r(std::max(nvars_, o.nvars_));
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : o.terms_) {
      Monomial m(ma.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
      r.add_term(m, ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::operator*(double c) const {
  Polynomial r(nvars_);
  if (c == 0.0) return r;
  for (const auto& [m, v] : terms_) r.terms_.emplace(m, v * c);
  return r;
}

Polynomial Polynomial::pow(int e) const {
  if (e < 0) throw std::invalid_argument("negative polynomial power");
  Polynomial r = constant(nvars_, 1.0);
  Polynomial base = *this;
  while (e > 0) {
    if (e & 1) r = r * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return r;
}

double Polynomial::evaluate(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (int k = 0; k < m[i]; ++k) t *= x[i];
    }
    s += t;
  }
  return s;
}

Polynomial Polynomial::derivative(std::size_t var) const {
  Polynomial r(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[var] == 0) continue;
    Monomial d = m;
    d[var] -= 1;
    r.add_term(d, c * m[var]);
  }
  return r;
}

std::optional<Polynomial> Polynomial::divide_linear(std::size_t var, double root, double tol) const {
  // Group by the exponent pattern of the other variables; synthetic division
  // in `var` for each group.
  std::map<Monomial, std::map<int, double>> groups;
  for (const auto& [m, c] : terms_) {
    Monomial rest = m;
    rest[var] = 0;
    groups[rest][m[var]] += c;
  }
  Polynomial q(nvars_);
  for (const auto& [rest, coeffs] : groups) {
    const int top = coeffs.rbegin()->first;
    std::vector<double> a(static_cast<std::size_t>(top) + 1, 0.0);
    double scale = 0.0;
    for (const auto& [k, c] : coeffs) {
      a[static_cast<std::size_t>(k)] = c;
      scale = std::max(scale, std::abs(c));
    }
    // a(x) = (x - root) b(x) + r
    std::vector<double> b(a.size() > 1 ? a.size() - 1 : 0, 0.0);
    double carry = 0.0;
    for (int k = top; k >= 1; --k) {
      carry = a[static_cast<std::size_t>(k)] + carry * root;
      b[static_cast<std::size_t>(k - 1)] = carry;
    }
    const double remainder = a[0] + carry * root;
    if (top == 0) {
      if (std::abs(a[0]) > tol * std::max(1.0, scale)) return std::nullopt;
      continue;
    }
    if (std::abs(remainder) > tol * std::max(1.0, scale)) return std::nullopt;
    for (std::size_t k = 0; k < b.size(); ++k) {
      Monomial m = rest;
      m[var] = static_cast<int>(k);
      q.add_term(m, b[k]);
    }
  }
  return q;
}

Polynomial Polynomial::substitute(const std::vector<Polynomial>& images) const {
  if (images.size() != nvars_) throw std::invalid_argument("substitute: arity mismatch");
  const std::size_t target = images.empty() ? 0 : images.front().nvars();
  Polynomial r(target);
  // Cache powers per variable.
  std::vector<std::vector<Polynomial>> powers(nvars_);
  for (const auto& [m, c] : terms_) {
    Polynomial t = constant(target, c);
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (m[i] == 0) continue;
      auto& cache = powers[i];
      if (cache.empty()) cache.push_back(constant(target, 1.0));
      while (static_cast<int>(cache.size()) <= m[i]) cache.push_back(cache.back() * images[i]);
      t = t * cache[static_cast<std::size_t>(m[i])];
    }
    r = r + t;
  }
  return r;
}

void Polynomial::prune(double tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= tol) it = terms_.erase(it);
    else ++it;
  }
}

std::string Polynomial::to_string(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      os << "*" << (i < names.size() ? names[i] : "x" + std::to_string(i));
      if (m[i] > 1) os << "^" << m[i];
    }
  }
  return os.str();
}

}  // namespace popmc
