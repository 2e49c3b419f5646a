#include "popmc/ode.hpp"

#include <algorithm>
#include <cmath>

#include "popmc/error.hpp"

namespace popmc {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y, const Eigen::VectorXd& y1,
                  const OdeConfig& cfg) {
  const auto n = err.size();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double initial_step(const OdeSystem& sys, double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                    double span, const OdeConfig& cfg, OdeStats& stats) {
  const auto n = static_cast<double>(std::max<std::size_t>(sys.dim, 1));
  Eigen::VectorXd sc = (cfg.atol + cfg.rtol * y0.array().abs()).matrix();
  const double dnf = std::sqrt((f0.array() / sc.array()).square().sum() / n);
  const double dny = std::sqrt((y0.array() / sc.array()).square().sum() / n);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  h = std::min(h, span);
  Eigen::VectorXd y1 = y0 + h * f0;
  Eigen::VectorXd f1(sys.dim);
  sys.rhs(t0 + h, y1, f1);
  ++stats.rhs_evals;
  const double der2 = std::sqrt(((f1 - f0).array() / sc.array()).square().sum() / n) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100 * h, h1, span});
}

}  // namespace

std::size_t OdeSolution::locate(double t) const {
  if (t_.empty()) return 0;
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  if (it == t_.begin()) return 0;
  return static_cast<std::size_t>(it - t_.begin()) - 1;
}

Eigen::VectorXd OdeSolution::operator()(double t) const {
  if (t_.empty() || t >= t_end_) return y_end_;
  const std::size_t k = locate(t);
  const double theta = std::clamp((t - t_[k]) / h_[k], 0.0, 1.0);
  const double s1 = 1.0 - theta;
  const auto& r = rc_[k];
  return r.col(0) + theta * (r.col(1) + s1 * (r.col(2) + theta * (r.col(3) + s1 * r.col(4))));
}

double OdeSolution::component(double t, std::size_t i) const {
  const auto ii = static_cast<Eigen::Index>(i);
  if (t_.empty() || t >= t_end_) return y_end_[ii];
  const std::size_t k = locate(t);
  const double theta = std::clamp((t - t_[k]) / h_[k], 0.0, 1.0);
  const double s1 = 1.0 - theta;
  const auto& r = rc_[k];
  return r(ii, 0) + theta * (r(ii, 1) + s1 * (r(ii, 2) + theta * (r(ii, 3) + s1 * r(ii, 4))));
}

void OdeSolution::append(const OdeSolution& next) {
  if (t_.empty() && y_end_.size() == 0) {
    *this = next;
    return;
  }
  t_.insert(t_.end(), next.t_.begin(), next.t_.end());
  h_.insert(h_.end(), next.h_.begin(), next.h_.end());
  rc_.insert(rc_.end(), next.rc_.begin(), next.rc_.end());
  t_end_ = next.t_end_;
  y_end_ = next.y_end_;
  stats_.steps += next.stats_.steps;
  stats_.rejected += next.stats_.rejected;
  stats_.rhs_evals += next.stats_.rhs_evals;
}

OdeSolution constant_solution(double t0, double t1, const Eigen::VectorXd& y) {
  OdeSolution s;
  s.dim_ = static_cast<std::size_t>(y.size());
  s.t_end_ = t1;
  s.y_end_ = y;
  if (t1 > t0) {
    Eigen::Matrix<double, Eigen::Dynamic, 5> rc = Eigen::Matrix<double, Eigen::Dynamic, 5>::Zero(y.size(), 5);
    rc.col(0) = y;
    s.t_.push_back(t0);
    s.h_.push_back(t1 - t0);
    s.rc_.push_back(rc);
  }
  return s;
}

OdeSolution integrate(const OdeSystem& sys, double t0, double t1, const Eigen::VectorXd& y0, const OdeConfig& cfg) {
  if (!(t1 >= t0)) throw Error("integrate: t1 < t0");
  if (!y0.allFinite()) throw NumericalError("non-finite initial state", t0);
  OdeSolution sol;
  sol.dim_ = sys.dim;
  sol.labels_ = sys.labels;
  sol.t_end_ = t1;
  sol.y_end_ = y0;
  if (t1 == t0) return sol;

  const auto n = static_cast<Eigen::Index>(sys.dim);
  Eigen::VectorXd y = y0, y1(n), ytmp(n);
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  OdeStats& st = sol.stats_;
  sys.rhs(t0, y, k1);
  ++st.rhs_evals;
  const double span = t1 - t0;
  double hmax = cfg.hmax > 0 ? cfg.hmax : span;
  double h = cfg.h0 > 0 ? cfg.h0 : initial_step(sys, t0, y, k1, span, cfg, st);
  h = std::min(h, hmax);

  constexpr double safe = 0.9, facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0, beta = 0.04;
  const double expo1 = 0.2 - beta * 0.75;
  double facold = 1e-4;
  double t = t0;
  bool last = false;
  bool reject = false;

  while (true) {
    if (st.steps + st.rejected > cfg.max_steps) throw NumericalError("too many integration steps", t);
    if (h < 1e-12 * std::max(1.0, std::abs(t))) throw NumericalError("step size underflow", t);
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    ytmp = y + h * a21 * k1;
    sys.rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    sys.rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    sys.rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    sys.rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    sys.rhs(t + h, ytmp, k6);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    sys.rhs(t + h, y1, k7);
    st.rhs_evals += 6;

    const Eigen::VectorXd errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = error_norm(errv, y, y1, cfg);
    if (!std::isfinite(err) || !y1.allFinite()) err = 1e10;
    const double fac11 = std::pow(std::max(err, 1e-300), expo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double hnew = h / fac;
      facold = std::max(err, 1e-4);
      ++st.steps;

      Eigen::Matrix<double, Eigen::Dynamic, 5> rc(n, 5);
      const Eigen::VectorXd ydiff = y1 - y;
      const Eigen::VectorXd bspl = h * k1 - ydiff;
      rc.col(0) = y;
      rc.col(1) = ydiff;
      rc.col(2) = bspl;
      rc.col(3) = ydiff - h * k7 - bspl;
      rc.col(4) = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      sol.t_.push_back(t);
      sol.h_.push_back(h);
      sol.rc_.push_back(std::move(rc));

      t = last ? t1 : t + h;
      y = y1;
      if (cfg.post_step) {
        cfg.post_step(t, y);
        sys.rhs(t, y, k1);
        ++st.rhs_evals;
      } else {
        k1 = k7;
      }
      if (last) break;
      hnew = std::min(hnew, hmax);
      if (reject) hnew = std::min(hnew, h);
      reject = false;
      h = hnew;
    } else {
      h = h / std::min(facc1, fac11 / safe);
      reject = true;
      last = false;
      ++st.rejected;
    }
  }
  sol.y_end_ = y;
  return sol;
}

}  // namespace popmc
