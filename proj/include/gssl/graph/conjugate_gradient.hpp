#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace gssl {

struct CgReport {
  std::size_t iterations = 0;
  double relative_residual = 0.0;  // true residual |b - A x| / max(|b|, eps)
  bool converged = false;
};

// Conjugate gradient for a symmetric positive-definite operator given as
// apply(x, y) computing y = A x. x holds the initial guess on entry.
// Convergence is judged on the true residual; if the recurrence residual
// drifted below tol while the true one did not, the iteration restarts.
template <typename Apply>
CgReport conjugate_gradient(const Apply& apply, const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol,
                            std::size_t max_iter) {
  const double scale = std::max(b.norm(), std::numeric_limits<double>::epsilon());
  Eigen::VectorXd r(b.size()), p(b.size()), q(b.size());
  CgReport report;

  for (;;) {
    apply(x, q);
    r = b - q;
    double rr = r.squaredNorm();
    report.relative_residual = std::sqrt(rr) / scale;
    if (report.relative_residual <= tol) {
      report.converged = true;
      return report;
    }
    if (report.iterations >= max_iter) return report;

    p = r;
    bool breakdown = false;
    while (report.iterations < max_iter) {
      ++report.iterations;
      apply(p, q);
      const double pq = p.dot(q);
      if (!(pq > 0.0)) {
        breakdown = true;
        break;
      }
      const double alpha = rr / pq;
      x.noalias() += alpha * p;
      r.noalias() -= alpha * q;
      const double rr_next = r.squaredNorm();
      if (std::sqrt(rr_next) / scale <= tol) break;
      p = r + (rr_next / rr) * p;
      rr = rr_next;
    }
    if (breakdown) {
      apply(x, q);
      report.relative_residual = (b - q).norm() / scale;
      report.converged = report.relative_residual <= tol;
      return report;
    }
  }
}

}  // namespace gssl
