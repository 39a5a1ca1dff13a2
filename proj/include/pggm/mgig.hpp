#ifndef PGGM_MGIG_HPP
#define PGGM_MGIG_HPP

// Mode of the matrix generalized inverse Gaussian distribution
//
//   MGIG_d(nu, A, B):  density ∝ |X|^{nu-(d+1)/2} exp(-tr(A X^{-1} + B X)/2),
//
// which is the unique SPD solution of the algebraic Riccati equation
//
//   (d + 1 - 2 nu) M + M B M = A.
//
// Used in place of an exact MGIG draw when d > 1.

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "pggm/distributions.hpp"
#include "pggm/errors.hpp"
#include "pggm/random.hpp"

namespace pggm {

struct MgigParams {
  double nu = 0.0;
  Eigen::MatrixXd A;  // symmetric PSD (SPD for a proper density)
  Eigen::MatrixXd B;  // SPD

  Eigen::Index dim() const { return B.rows(); }

  // Riccati coefficient d + 1 - 2 nu.
  double linear_coefficient() const {
    return static_cast<double>(dim()) + 1.0 - 2.0 * nu;
  }
};

struct RiccatiOptions {
  double tol = 1e-10;
  int max_iter = 200;
};

struct RiccatiSolution {
  Eigen::MatrixXd mode;
  int iterations = 0;
  double relative_residual = 0.0;
};

inline double riccati_residual_norm(const MgigParams& params, const Eigen::MatrixXd& m) {
  return (params.linear_coefficient() * m + m * params.B * m - params.A).norm();
}

namespace detail {

inline void validate_mgig(const MgigParams& params) {
  const Eigen::Index d = params.B.rows();
  if (d == 0 || params.B.cols() != d || params.A.rows() != d || params.A.cols() != d)
    throw DimensionMismatch("MGIG: A and B must be square matrices of the same dimension");
  if (!std::isfinite(params.nu) || !params.A.allFinite() || !params.B.allFinite())
    throw InvalidParameter("MGIG: non-finite parameter");
  if ((params.A - params.A.transpose()).norm() > 1e-10 * params.A.norm())
    throw InvalidParameter("MGIG: A must be symmetric");
  if ((params.B - params.B.transpose()).norm() > 1e-10 * params.B.norm())
    throw InvalidParameter("MGIG: B must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(params.B);
  if (llt.info() != Eigen::Success) throw InvalidParameter("MGIG: B must be positive definite");
}

}  // namespace detail

/// Solves (d+1-2nu) M + M B M = A by Newton's method.
///
/// With B = L L^T and W = L^T M L the equation reads W^2 + c W = L^T A L, and
/// each Newton step is a Lyapunov equation S E + E S = R with S = W + c/2 I
/// symmetric, solved in the eigenbasis of S. Iterates stay symmetric; starting
/// from a point with S > 0 the sequence decreases monotonically to the
/// stabilizing (SPD) root. `warm_start`, when given and admissible, replaces
/// the default start c0 I built from the mean eigenvalues of A and B.
inline RiccatiSolution mgig_mode(const MgigParams& params, const RiccatiOptions& options = {},
                                 const Eigen::MatrixXd* warm_start = nullptr) {
  detail::validate_mgig(params);
  if (!(options.tol > 0.0) || options.max_iter < 1)
    throw InvalidParameter("mgig_mode: tol must be positive and max_iter >= 1");
  const Eigen::Index d = params.dim();
  const double c = params.linear_coefficient();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(params.B).matrixL();
  const Eigen::MatrixXd chol_inv = chol.triangularView<Eigen::Lower>().solve(identity);
  const Eigen::MatrixXd c_mat = chol.transpose() * params.A * chol;  // L^T A L

  auto to_w = [&](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
    Eigen::MatrixXd w = chol.transpose() * m * chol;
    return 0.5 * (w + w.transpose());
  };
  auto from_w = [&](const Eigen::MatrixXd& w) -> Eigen::MatrixXd {
    Eigen::MatrixXd m = chol_inv.transpose() * w * chol_inv;
    return 0.5 * (m + m.transpose());
  };
  auto admissible = [&](const Eigen::MatrixXd& w) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w + 0.5 * c * identity,
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() > 0.0;
  };

  Eigen::MatrixXd w;
  bool have_start = false;
  if (warm_start != nullptr && warm_start->rows() == d && warm_start->cols() == d &&
      warm_start->allFinite()) {
    w = to_w(*warm_start);
    have_start = admissible(w);
  }
  if (!have_start) {
    const double a_bar = params.A.trace() / static_cast<double>(d);
    const double b_bar = params.B.trace() / static_cast<double>(d);
    const double disc = std::sqrt(c * c + 4.0 * a_bar * b_bar);
    double m0 = c > 0.0 ? 2.0 * a_bar / (c + disc) : (disc - c) / (2.0 * b_bar);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(params.B, Eigen::EigenvaluesOnly);
    const double b_min = eb.eigenvalues().minCoeff();
    if (!(m0 * b_min + 0.5 * c > 0.0)) m0 = std::max(m0, -c / b_min);
    w = m0 * (chol.transpose() * chol);
  }

  const double a_norm = params.A.norm();
  auto relative_residual = [&](const Eigen::MatrixXd& m) {
    const double r = riccati_residual_norm(params, m);
    const double scale = a_norm > 0.0 ? a_norm : (m * params.B * m).norm() + std::abs(c) * m.norm();
    return scale > 0.0 ? r / scale : r;
  };

  auto newton_step = [&](const Eigen::MatrixXd& w_cur) -> Eigen::MatrixXd {
    // S W' + W' S = W^2 + C with S = W + c/2 I.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w_cur + 0.5 * c * identity);
    const Eigen::MatrixXd& q = es.eigenvectors();
    const Eigen::VectorXd& ev = es.eigenvalues();
    Eigen::MatrixXd rhs = q.transpose() * (w_cur * w_cur + c_mat) * q;
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = 0; i < d; ++i) rhs(i, j) /= ev(i) + ev(j);
    Eigen::MatrixXd next = q * rhs * q.transpose();
    return 0.5 * (next + next.transpose());
  };

  RiccatiSolution out;
  Eigen::MatrixXd m = from_w(w);
  double res = relative_residual(m);
  int it = 0;
  while (res > options.tol) {
    if (it >= options.max_iter) {
      std::ostringstream msg;
      msg << "mgig_mode: no convergence after " << it << " iterations (relative residual " << res
          << ")";
      throw NoConvergence(msg.str());
    }
    w = newton_step(w);
    m = from_w(w);
    res = relative_residual(m);
    ++it;
    if (!m.allFinite()) throw NumericalError("mgig_mode: non-finite iterate");
  }
  // One polishing step; quadratic convergence takes the error to rounding level.
  if (it > 0 || res > 0.0) {
    const Eigen::MatrixXd w_next = newton_step(w);
    const Eigen::MatrixXd m_next = from_w(w_next);
    const double res_next = relative_residual(m_next);
    if (m_next.allFinite() && res_next <= res) {
      m = m_next;
      res = res_next;
      ++it;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> check(m);
  if (check.info() != Eigen::Success)
    throw NumericalError("mgig_mode: Riccati solution is not positive definite");
  out.mode = std::move(m);
  out.iterations = it;
  out.relative_residual = res;
  return out;
}

/// Exact GIG draw when d = 1; the (deterministic) mode otherwise.
inline Eigen::MatrixXd mgig_draw_or_mode(Rng& rng, const MgigParams& params,
                                         const RiccatiOptions& options = {},
                                         const Eigen::MatrixXd* warm_start = nullptr,
                                         int* iterations = nullptr) {
  detail::validate_mgig(params);
  if (iterations != nullptr) *iterations = 0;
  if (params.dim() == 1) {
    const double a = params.A(0, 0);
    const double b = params.B(0, 0);
    double x;
    if (a > 0.0) {
      x = sample_gig(rng, GigParams{params.nu, a, b});
    } else {
      // a -> 0 limit: Gamma(nu, b/2).
      x = sample_gamma(rng, params.nu, b / 2.0);
    }
    return Eigen::MatrixXd::Constant(1, 1, x);
  }
  RiccatiSolution sol = mgig_mode(params, options, warm_start);
  if (iterations != nullptr) *iterations = sol.iterations;
  return sol.mode;
}

/// Unnormalized MGIG log-density.
inline double logpdf_mgig(const Eigen::MatrixXd& x, const MgigParams& params) {
  Eigen::LLT<Eigen::MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) throw DomainError("logpdf_mgig: X must be SPD");
  const Eigen::MatrixXd l = llt.matrixL();
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  const double d = static_cast<double>(x.rows());
  const double tr_ax = (params.A * llt.solve(Eigen::MatrixXd::Identity(x.rows(), x.rows()))).trace();
  return (params.nu - (d + 1.0) / 2.0) * logdet - 0.5 * (tr_ax + (params.B * x).trace());
}

}  // namespace pggm

#endif  // PGGM_MGIG_HPP
