#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls into the code under test beyond the
// residual function being differentiated.

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "crutchlab/lmm/design.hpp"
#include "crutchlab/tensegrity/solver.hpp"

namespace crutchlab::oracle {

// Exact Gaussian log-likelihood with dense per-group covariance.
inline double dense_loglik(const lmm::Design& d, const Eigen::VectorXd& beta, double v0, double v) {
  using Eigen::Index;
  double ll = 0.0;
  for (int g = 0; g < d.n_groups(); ++g) {
    std::vector<Index> rows;
    for (Index i = 0; i < d.n_obs(); ++i)
      if (d.group[static_cast<std::size_t>(i)] == g) rows.push_back(i);
    const auto m = static_cast<Index>(rows.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(m, m, v0);
    cov.diagonal().array() += v;
    Eigen::VectorXd r(m);
    for (Index k = 0; k < m; ++k) {
      const Index i = rows[static_cast<std::size_t>(k)];
      r(k) = d.y(i) - d.x.row(i).dot(beta);
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::MatrixXd l = llt.matrixL();
    ll += -0.5 * (static_cast<double>(m) * std::log(2 * std::numbers::pi) + 2 * l.diagonal().array().log().sum() +
                  r.dot(llt.solve(r)));
  }
  return ll;
}

// Plain Nelder-Mead minimizer with restarts.
inline Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                   double scale, int restarts) {
  using Eigen::VectorXd;
  const Eigen::Index n = x0.size();
  for (int rs = 0; rs < restarts; ++rs) {
    std::vector<VectorXd> s(static_cast<std::size_t>(n + 1), x0);
    std::vector<double> fs(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) s[static_cast<std::size_t>(i + 1)](i) += scale;
    for (std::size_t i = 0; i < s.size(); ++i) fs[i] = f(s[i]);
    for (int it = 0; it < 20000; ++it) {
      std::vector<std::size_t> o(s.size());
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = i;
      std::sort(o.begin(), o.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
      if (std::abs(fs[o.back()] - fs[o.front()]) < 1e-13 * (1 + std::abs(fs[o.front()]))) break;
      VectorXd c = VectorXd::Zero(n);
      for (std::size_t i = 0; i + 1 < o.size(); ++i) c += s[o[i]];
      c /= static_cast<double>(n);
      const std::size_t w = o.back();
      const VectorXd xr = c + (c - s[w]);
      const double fr = f(xr);
      if (fr < fs[o.front()]) {
        const VectorXd xe = c + 2.0 * (c - s[w]);
        const double fe = f(xe);
        if (fe < fr) { s[w] = xe; fs[w] = fe; } else { s[w] = xr; fs[w] = fr; }
      } else if (fr < fs[o[o.size() - 2]]) {
        s[w] = xr; fs[w] = fr;
      } else {
        const VectorXd xc = c + 0.5 * (s[w] - c);
        const double fc = f(xc);
        if (fc < fs[w]) {
          s[w] = xc; fs[w] = fc;
        } else {
          for (std::size_t i = 1; i < o.size(); ++i) {
            s[o[i]] = s[o[0]] + 0.5 * (s[o[i]] - s[o[0]]);
            fs[o[i]] = f(s[o[i]]);
          }
        }
      }
    }
    x0 = s[static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin())];
    scale *= 0.3;
  }
  return x0;
}

// Central-difference Jacobian of the internal force vector.
inline Eigen::MatrixXd fd_tangent(const tensegrity::Topology& t, const tensegrity::Coordinates& x, double h) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    tensegrity::Coordinates xp = x, xm = x;
    xp.data()[c] += h;
    xm.data()[c] -= h;
    const tensegrity::Coordinates gp = tensegrity::internal_forces(t, xp);
    const tensegrity::Coordinates gm = tensegrity::internal_forces(t, xm);
    for (Eigen::Index r = 0; r < n; ++r) k(r, c) = (gp.data()[r] - gm.data()[r]) / (2.0 * h);
  }
  return k;
}

}  // namespace crutchlab::oracle
