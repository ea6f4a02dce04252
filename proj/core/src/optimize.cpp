#include "afc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "afc/errors.hpp"

namespace afc::opt {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double step_for(double x, double rel) { return rel * std::max(std::abs(x), 1e-3); }

struct Counted {
  const Objective& f;
  int calls = 0;
  double operator()(std::span<const double> x) {
    ++calls;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }
};

bool small_change(double before, double after, double tol) {
  return std::abs(before - after) <= tol * std::max({std::abs(before), std::abs(after), 1e-300});
}

}  // namespace

void Box::validate(std::size_t dimension) const {
  if (lower.size() != dimension || upper.size() != dimension) {
    throw DomainError(fmt::format("bounds have {} / {} entries, expected {}", lower.size(), upper.size(), dimension));
  }
  for (std::size_t i = 0; i < dimension; ++i) {
    if (!(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] < upper[i])) {
      throw DomainError(fmt::format("parameter {} has invalid bounds [{}, {}]", i, lower[i], upper[i]));
    }
  }
}

void Box::clamp(std::span<double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
}

std::vector<double> gradient(const Objective& f, std::span<const double> x, const Box& box, double rel_step) {
  std::vector<double> g(x.size());
  std::vector<double> p(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = step_for(x[i], rel_step);
    const double up = std::min(x[i] + h, box.upper[i]);
    const double down = std::max(x[i] - h, box.lower[i]);
    p[i] = up;
    const double fu = f(p);
    p[i] = down;
    const double fd = f(p);
    p[i] = x[i];
    g[i] = (fu - fd) / (up - down);
  }
  return g;
}

std::vector<double> hessian(const Objective& f, std::span<const double> x, const Box& box, double rel_step) {
  const std::size_t n = x.size();
  std::vector<double> h(n * n);
  std::vector<double> p(x.begin(), x.end());
  std::vector<double> step(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Keep the stencil inside the box by shifting its centre if needed.
    step[i] = std::min(step_for(x[i], rel_step), 0.25 * (box.upper[i] - box.lower[i]));
    p[i] = std::clamp(x[i], box.lower[i] + step[i], box.upper[i] - step[i]);
  }
  const double f0 = f(p);
  auto eval = [&](std::size_t i, double si, std::size_t j, double sj) {
    auto q = p;
    q[i] += si;
    q[j] += sj;
    return f(q);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = step[i];
    h[i * n + i] = (eval(i, hi, i, 0.0) - 2.0 * f0 + eval(i, -hi, i, 0.0)) / (hi * hi);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double hj = step[j];
      const double v = (eval(i, hi, j, hj) - eval(i, hi, j, -hj) - eval(i, -hi, j, hj) + eval(i, -hi, j, -hj)) /
                       (4.0 * hi * hj);
      h[i * n + j] = v;
      h[j * n + i] = v;
    }
  }
  return h;
}

Result minimize_bfgs(const Objective& objective, std::vector<double> x0, const Box& box, const Options& options) {
  const std::size_t n = x0.size();
  box.validate(n);
  box.clamp(x0);
  Counted f{objective};
  Result r;
  r.x = std::move(x0);
  r.cost = f(r.x);
  r.initial_cost = r.cost;
  if (!std::isfinite(r.cost)) {
    r.status = "cost is not finite at the starting point";
    r.evaluations = f.calls;
    return r;
  }
  const Objective counted = [&](std::span<const double> x) { return f(x); };
  auto g = gradient(counted, r.x, box, options.fd_step);
  MatrixXd inv_h = MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  int stalls = 0;

  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    // Variables pinned at a bound with the gradient pushing outward stay fixed.
    std::vector<bool> free(n, true);
    double pg_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool at_low = r.x[i] <= box.lower[i] && g[i] > 0.0;
      const bool at_high = r.x[i] >= box.upper[i] && g[i] < 0.0;
      free[i] = !(at_low || at_high);
      if (free[i]) pg_norm = std::max(pg_norm, std::abs(g[i]) * (box.upper[i] - box.lower[i]));
    }
    if (pg_norm <= options.gradient_tolerance * std::max(1.0, std::abs(r.cost))) {
      r.converged = true;
      r.status = "projected gradient below tolerance";
      break;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      VectorXd d = VectorXd::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        if (!free[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (free[j]) d[static_cast<Eigen::Index>(i)] -= inv_h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * g[j];
        }
      }
      double slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += g[i] * d[static_cast<Eigen::Index>(i)];
      if (!(slope < 0.0)) {
        inv_h.setIdentity();
        continue;
      }
      double alpha = 1.0;
      for (int k = 0; k < 50; ++k, alpha *= 0.5) {
        std::vector<double> trial(n);
        double decrease = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          trial[i] = std::clamp(r.x[i] + alpha * d[static_cast<Eigen::Index>(i)], box.lower[i], box.upper[i]);
          decrease += g[i] * (trial[i] - r.x[i]);
        }
        const double ft = f(trial);
        if (ft <= r.cost + 1e-4 * decrease && ft <= r.cost) {
          const double previous = r.cost;
          double step_norm = 0.0;
          for (std::size_t i = 0; i < n; ++i) step_norm = std::max(step_norm, std::abs(trial[i] - r.x[i]));
          auto g_new = gradient(counted, trial, box, options.fd_step);
          VectorXd s(static_cast<Eigen::Index>(n));
          VectorXd y(static_cast<Eigen::Index>(n));
          for (std::size_t i = 0; i < n; ++i) {
            s[static_cast<Eigen::Index>(i)] = trial[i] - r.x[i];
            y[static_cast<Eigen::Index>(i)] = g_new[i] - g[i];
          }
          const double sy = s.dot(y);
          if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const MatrixXd ident = MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            inv_h = (ident - rho * s * y.transpose()) * inv_h * (ident - rho * y * s.transpose()) +
                    rho * s * s.transpose();
          }
          r.x = std::move(trial);
          r.cost = ft;
          g = std::move(g_new);
          r.cost_history.push_back(r.cost);
          accepted = true;
          if (small_change(previous, r.cost, options.cost_tolerance) || step_norm <= options.step_tolerance) {
            ++stalls;
          } else {
            stalls = 0;
          }
          break;
        }
      }
      if (!accepted) inv_h.setIdentity();
    }
    if (!accepted) {
      r.converged = true;
      r.status = "no descent step found (local minimum to finite-difference accuracy)";
      break;
    }
    if (stalls >= 2) {
      r.converged = true;
      r.status = "cost change below tolerance";
      ++r.iterations;
      break;
    }
  }
  if (!r.converged && r.status.empty()) r.status = "iteration limit reached";
  r.evaluations = f.calls;
  return r;
}

Result minimize_nelder_mead(const Objective& objective, std::vector<double> x0, const Box& box,
                            const Options& options) {
  const std::size_t n = x0.size();
  box.validate(n);
  box.clamp(x0);
  Counted f{objective};
  std::vector<std::vector<double>> simplex{x0};
  for (std::size_t i = 0; i < n; ++i) {
    auto v = x0;
    const double span = box.upper[i] - box.lower[i];
    v[i] += (v[i] + 0.05 * span <= box.upper[i]) ? 0.05 * span : -0.05 * span;
    simplex.push_back(std::move(v));
  }
  std::vector<double> values;
  for (const auto& v : simplex) values.push_back(f(v));
  Result r;
  r.initial_cost = values.front();

  auto order = [&] {
    std::vector<std::size_t> idx(simplex.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s;
    std::vector<double> v;
    for (auto i : idx) {
      s.push_back(simplex[i]);
      v.push_back(values[i]);
    }
    simplex = std::move(s);
    values = std::move(v);
  };
  auto point = [&](const std::vector<double>& centroid, const std::vector<double>& worst, double t) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + t * (worst[i] - centroid[i]);
    box.clamp(p);
    return p;
  };

  order();
  double best = values.front();
  for (r.iterations = 0; r.iterations < options.max_iterations * static_cast<int>(n + 1); ++r.iterations) {
    if (small_change(values.front(), values.back(), options.cost_tolerance * 10.0)) {
      r.converged = true;
      r.status = "simplex collapsed";
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k][i] / static_cast<double>(n);
    const auto reflected = point(centroid, simplex.back(), -1.0);
    const double fr = f(reflected);
    if (fr < values.front()) {
      const auto expanded = point(centroid, simplex.back(), -2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex.back() = expanded;
        values.back() = fe;
      } else {
        simplex.back() = reflected;
        values.back() = fr;
      }
    } else if (fr < values[n - 1]) {
      simplex.back() = reflected;
      values.back() = fr;
    } else {
      const bool outside = fr < values.back();
      const auto contracted = point(centroid, simplex.back(), outside ? -0.5 : 0.5);
      const double fc = f(contracted);
      if (fc < std::min(fr, values.back())) {
        simplex.back() = contracted;
        values.back() = fc;
      } else {
        for (std::size_t k = 1; k <= n; ++k) {
          for (std::size_t i = 0; i < n; ++i) simplex[k][i] = simplex[0][i] + 0.5 * (simplex[k][i] - simplex[0][i]);
          values[k] = f(simplex[k]);
        }
      }
    }
    order();
    if (values.front() < best) {
      best = values.front();
      r.cost_history.push_back(best);
    }
  }
  if (!r.converged) r.status = "iteration limit reached";
  r.x = simplex.front();
  r.cost = values.front();
  r.evaluations = f.calls;
  return r;
}

LeastSquaresResult levenberg_marquardt(const Residuals& residuals, std::size_t m, std::vector<double> x0,
                                       const Box& box, const Options& options) {
  const std::size_t n = x0.size();
  box.validate(n);
  box.clamp(x0);
  const auto rows = static_cast<Eigen::Index>(m);
  const auto cols = static_cast<Eigen::Index>(n);
  int evaluations = 0;
  auto eval = [&](std::span<const double> x, VectorXd& r) {
    r.resize(rows);
    residuals(x, std::span<double>(r.data(), m));
    ++evaluations;
    return r.allFinite() ? r.squaredNorm() : std::numeric_limits<double>::infinity();
  };
  auto jacobian = [&](const std::vector<double>& x, const VectorXd& r0, MatrixXd& j) {
    j.resize(rows, cols);
    auto p = x;
    VectorXd r;
    for (std::size_t c = 0; c < n; ++c) {
      double h = step_for(x[c], options.fd_step * 10.0);
      if (x[c] + h > box.upper[c]) h = -h;
      p[c] = x[c] + h;
      eval(p, r);
      p[c] = x[c];
      j.col(static_cast<Eigen::Index>(c)) = (r - r0) / h;
    }
  };

  LeastSquaresResult out;
  Result& fit = out.fit;
  fit.x = std::move(x0);
  VectorXd r;
  fit.cost = eval(fit.x, r);
  fit.initial_cost = fit.cost;
  if (!std::isfinite(fit.cost)) throw FitError("least-squares residuals are not finite at the starting point");
  MatrixXd j;
  jacobian(fit.x, r, j);
  double lambda = 1e-3;
  int stalls = 0;
  for (fit.iterations = 0; fit.iterations < options.max_iterations; ++fit.iterations) {
    const MatrixXd jtj = j.transpose() * j;
    const VectorXd jtr = j.transpose() * r;
    if (jtr.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance * std::max(1.0, fit.cost)) {
      fit.converged = true;
      fit.status = "gradient below tolerance";
      break;
    }
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      MatrixXd a = jtj;
      for (Eigen::Index i = 0; i < cols; ++i) a(i, i) += lambda * std::max(jtj(i, i), 1e-12);
      const VectorXd delta = a.ldlt().solve(-jtr);
      std::vector<double> trial(n);
      double step = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = std::clamp(fit.x[i] + delta[static_cast<Eigen::Index>(i)], box.lower[i], box.upper[i]);
        step = std::max(step, std::abs(trial[i] - fit.x[i]) / std::max(std::abs(fit.x[i]), 1e-3));
      }
      VectorXd rt;
      const double ct = eval(trial, rt);
      if (ct < fit.cost) {
        const double previous = fit.cost;
        fit.x = std::move(trial);
        fit.cost = ct;
        r = std::move(rt);
        jacobian(fit.x, r, j);
        fit.cost_history.push_back(fit.cost);
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (small_change(previous, fit.cost, options.cost_tolerance) || step <= options.step_tolerance) {
          ++stalls;
        } else {
          stalls = 0;
        }
        break;
      }
      lambda *= 4.0;
      if (step <= options.step_tolerance) break;
    }
    if (!accepted) {
      fit.converged = true;
      fit.status = "no further decrease (local minimum)";
      break;
    }
    if (stalls >= 2) {
      fit.converged = true;
      fit.status = "cost change below tolerance";
      ++fit.iterations;
      break;
    }
  }
  if (!fit.converged) fit.status = "iteration limit reached";
  fit.evaluations = evaluations;

  out.residuals.assign(r.data(), r.data() + r.size());
  out.jacobian.resize(m * n);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < n; ++b) out.jacobian[a * n + b] = j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  if (m > n) {
    // Equilibrate columns first; parameters may differ by many decades.
    Eigen::VectorXd scale(static_cast<Eigen::Index>(n));
    for (Eigen::Index b = 0; b < scale.size(); ++b) {
      const double norm = j.col(b).norm();
      scale(b) = norm > 0.0 ? 1.0 / norm : 1.0;
    }
    const MatrixXd js = j * scale.asDiagonal();
    Eigen::FullPivLU<MatrixXd> lu(js.transpose() * js);
    if (lu.isInvertible()) {
      const MatrixXd cov =
          scale.asDiagonal() * lu.inverse() * scale.asDiagonal() * (fit.cost / static_cast<double>(m - n));
      out.covariance.assign(cov.data(), cov.data() + cov.size());  // symmetric, so storage order is moot
    }
  }
  return out;
}

double condition_number(std::span<const double> matrix, std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::Map<const MatrixXd> a(matrix.data(), dim, dim);
  Eigen::JacobiSVD<MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] <= 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / s[s.size() - 1];
}

std::vector<double> inverse_spd(std::span<const double> matrix, std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::Map<const MatrixXd> a(matrix.data(), dim, dim);
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return {};
  const MatrixXd inv = llt.solve(MatrixXd::Identity(dim, dim));
  return {inv.data(), inv.data() + inv.size()};
}

}  // namespace afc::opt
