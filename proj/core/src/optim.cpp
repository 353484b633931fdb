#include "s2gpt/optim.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "s2gpt/errors.hpp"

namespace s2gpt {

using Eigen::VectorXd;

std::string_view status_name(OptimStatus s) {
  switch (s) {
    case OptimStatus::Converged: return "converged";
    case OptimStatus::MaxEpochs: return "max_epochs";
    case OptimStatus::LineSearchFailed: return "line_search_failed";
    case OptimStatus::Diverged: return "diverged";
  }
  return "unknown";
}

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
    throw ConfigError("Wolfe parameters must satisfy 0 < c1 < c2 < 1");
  if (history == 0) throw ConfigError("L-BFGS history must be positive");
}

namespace {

double max_norm(const VectorXd& g) { return g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0; }

bool finite(double v, const VectorXd& g) { return std::isfinite(v) && g.allFinite(); }

// Shared driver for the first-order methods.
template <class Step>
OptimResult first_order(const Oracle& f, VectorXd x, const OptimConfig& cfg, Step&& step) {
  cfg.validate();
  OptimResult r;
  VectorXd g(x.size());
  for (std::size_t epoch = 0;; ++epoch) {
    g.setZero();
    const double loss = f(x, g);
    ++r.evaluations;
    if (!finite(loss, g)) {
      r.status = OptimStatus::Diverged;
      if (r.history.empty()) {
        r.x = x;
        r.loss = loss;
      }
      return r;
    }
    r.x = x;
    r.loss = loss;
    r.history.push_back(loss);
    if (max_norm(g) <= cfg.grad_tol) {
      r.status = OptimStatus::Converged;
      return r;
    }
    if (epoch == cfg.epochs) {
      r.status = OptimStatus::MaxEpochs;
      return r;
    }
    step(x, g, epoch + 1);
    r.epochs_run = epoch + 1;
  }
}

struct Trial {
  double alpha = 0.0;
  double phi = 0.0;
  double dphi = 0.0;
  bool ok = false;
};

// Minimizer of the cubic through (a, fa, da), (b, fb, db), clamped to the
// inner 80% of the interval; bisection when the cubic is unusable.
double cubic_step(const Trial& a, const Trial& b) {
  const double lo = std::min(a.alpha, b.alpha), hi = std::max(a.alpha, b.alpha);
  const double guard = 0.1 * (hi - lo);
  double t = 0.5 * (lo + hi);
  if (a.ok && b.ok) {
    const double d1 = a.dphi + b.dphi - 3.0 * (a.phi - b.phi) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.dphi * b.dphi;
    if (disc >= 0.0) {
      const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
      const double c = b.alpha - (b.alpha - a.alpha) * (b.dphi + d2 - d1) / (b.dphi - a.dphi + 2.0 * d2);
      if (std::isfinite(c)) t = c;
    }
  }
  return std::clamp(t, lo + guard, hi - guard);
}

class LineSearch {
public:
  LineSearch(const Oracle& f, const VectorXd& x, const VectorXd& d, double phi0, double dphi0,
             const OptimConfig& cfg, std::size_t& evals)
      : f_(f), x_(x), d_(d), phi0_(phi0), dphi0_(dphi0), cfg_(cfg), evals_(evals) {
    g_.resize(x.size());
  }

  // Strong-Wolfe search; on success the accepted point lands in x_new/g_new.
  bool run(double alpha0, double& alpha, VectorXd& x_new, VectorXd& g_new, double& phi) {
    Trial prev{0.0, phi0_, dphi0_, true};
    double a = alpha0;
    for (std::size_t i = 0; i < cfg_.max_line_search; ++i) {
      Trial cur = eval(a);
      if (!cur.ok || cur.phi > phi0_ + cfg_.wolfe_c1 * a * dphi0_ || (i > 0 && cur.phi >= prev.phi))
        return zoom(prev, cur, alpha, x_new, g_new, phi);
      if (std::abs(cur.dphi) <= -cfg_.wolfe_c2 * dphi0_) return accept(cur, alpha, x_new, g_new, phi);
      if (cur.dphi >= 0.0) return zoom(cur, prev, alpha, x_new, g_new, phi);
      prev = cur;
      a *= 2.0;
    }
    return false;
  }

private:
  Trial eval(double a) {
    x_try_ = x_ + a * d_;
    g_.setZero();
    const double phi = f_(x_try_, g_);
    ++evals_;
    Trial t{a, phi, 0.0, finite(phi, g_)};
    if (t.ok) t.dphi = g_.dot(d_);
    if (t.ok && (!best_ok_ || phi < best_.phi)) {
      best_ = t;
      best_ok_ = true;
      best_x_ = x_try_;
      best_g_ = g_;
    }
    return t;
  }

  bool accept(const Trial& t, double& alpha, VectorXd& x_new, VectorXd& g_new, double& phi) {
    // The accepted trial is always the most recent evaluation.
    alpha = t.alpha;
    x_new = x_try_;
    g_new = g_;
    phi = t.phi;
    return true;
  }

  bool zoom(Trial lo, Trial hi, double& alpha, VectorXd& x_new, VectorXd& g_new, double& phi) {
    for (std::size_t i = 0; i < cfg_.max_line_search; ++i) {
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, lo.alpha)) break;
      const double a = cubic_step(lo, hi);
      Trial cur = eval(a);
      if (!cur.ok || cur.phi > phi0_ + cfg_.wolfe_c1 * a * dphi0_ || cur.phi >= lo.phi) {
        hi = cur;
      } else {
        if (std::abs(cur.dphi) <= -cfg_.wolfe_c2 * dphi0_) return accept(cur, alpha, x_new, g_new, phi);
        if (cur.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = cur;
      }
    }
    // No strong-Wolfe point; fall back to any sufficient decrease seen.
    if (best_ok_ && best_.phi < phi0_ + cfg_.wolfe_c1 * best_.alpha * dphi0_ && best_.alpha > 0.0) {
      alpha = best_.alpha;
      x_new = best_x_;
      g_new = best_g_;
      phi = best_.phi;
      return true;
    }
    return false;
  }

  const Oracle& f_;
  const VectorXd& x_;
  const VectorXd& d_;
  double phi0_, dphi0_;
  const OptimConfig& cfg_;
  std::size_t& evals_;
  VectorXd x_try_, g_;
  Trial best_;
  bool best_ok_ = false;
  VectorXd best_x_, best_g_;
};

}  // namespace

OptimResult gd_run(const Oracle& f, VectorXd x0, const OptimConfig& config) {
  const double lr = config.learning_rate;
  return first_order(f, std::move(x0), config,
                     [lr](VectorXd& x, const VectorXd& g, std::size_t) { x -= lr * g; });
}

OptimResult adam_run(const Oracle& f, VectorXd x0, const OptimConfig& config) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  VectorXd m = VectorXd::Zero(x0.size()), v = VectorXd::Zero(x0.size());
  const double lr = config.learning_rate;
  return first_order(f, std::move(x0), config, [&](VectorXd& x, const VectorXd& g, std::size_t t) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, double(t));
    const double c2 = 1.0 - std::pow(b2, double(t));
    x.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  });
}

OptimResult lbfgs_run(const Oracle& f, VectorXd x0, const OptimConfig& config) {
  config.validate();
  OptimResult r;
  VectorXd x = std::move(x0);
  VectorXd g = VectorXd::Zero(x.size());
  double loss = f(x, g);
  r.evaluations = 1;
  r.x = x;
  r.loss = loss;
  if (!finite(loss, g)) {
    r.status = OptimStatus::Diverged;
    return r;
  }
  r.history.push_back(loss);
  if (max_norm(g) <= config.grad_tol) {
    r.status = OptimStatus::Converged;
    return r;
  }

  std::deque<VectorXd> S, Y;
  std::deque<double> rho;
  VectorXd d(x.size()), x_new(x.size()), g_new(x.size()), q(x.size());
  std::vector<double> a(config.history);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    // Two-loop recursion for d = -H g.
    q = g;
    const std::size_t m = S.size();
    for (std::size_t i = m; i-- > 0;) {
      a[i] = rho[i] * S[i].dot(q);
      q -= a[i] * Y[i];
    }
    if (m > 0) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double b = rho[i] * Y[i].dot(q);
      q += (a[i] - b) * S[i];
    }
    d = -q;
    double dphi0 = g.dot(d);
    if (!(dphi0 < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      d = -g;
      dphi0 = -g.squaredNorm();
    }
    // Without curvature pairs the direction is unscaled; start from the
    // configured learning rate. Quasi-Newton directions start from 1.
    const double alpha0 = S.empty() ? config.learning_rate * std::min(1.0, 1.0 / g.lpNorm<1>())
                                    : 1.0;

    double alpha = 0.0, loss_new = 0.0;
    LineSearch ls(f, x, d, loss, dphi0, config, r.evaluations);
    if (!ls.run(alpha0, alpha, x_new, g_new, loss_new)) {
      r.status = OptimStatus::LineSearchFailed;
      r.epochs_run = epoch - 1;
      return r;
    }

    VectorXd s = x_new - x;
    VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
      if (S.size() == config.history) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
    }

    const double change = std::abs(loss - loss_new);
    x = x_new;
    g = g_new;
    loss = loss_new;
    r.x = x;
    r.loss = loss;
    r.history.push_back(loss);
    r.epochs_run = epoch;
    if (max_norm(g) <= config.grad_tol ||
        (config.loss_change_tol > 0.0 &&
         change <= config.loss_change_tol * std::max(1.0, std::abs(loss)))) {
      r.status = OptimStatus::Converged;
      return r;
    }
  }
  r.status = OptimStatus::MaxEpochs;
  return r;
}

}  // namespace s2gpt
