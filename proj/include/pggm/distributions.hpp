#ifndef PGGM_DISTRIBUTIONS_HPP
#define PGGM_DISTRIBUTIONS_HPP

// Random variates and (unnormalized) log-densities for the families used by
// the hierarchy, in the following parametrizations:
//
//   Gamma(a, b)        density ∝ x^{a-1} e^{-b x}                  (shape, rate)
//   Exponential(l)     Gamma(1, l)
//   Beta(a, b)         density ∝ x^{a-1} (1-x)^{b-1}
//   GIG(nu, a, b)      density ∝ x^{nu-1} exp(-a/(2x) - b x/2)
//   Wishart_d(u, V)    density ∝ |X|^{(u-d-1)/2} exp(-tr(V^{-1} X)/2),  E[X] = u V
//   MN(M, S1, S2)      vec(X) ~ N(vec(M), S2 ⊗ S1)

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pggm/errors.hpp"
#include "pggm/random.hpp"

namespace pggm {

struct GigParams {
  double nu = 0.0;
  double a = 1.0;  // coefficient of 1/x
  double b = 1.0;  // coefficient of x

  void validate() const {
    if (!std::isfinite(nu) || !std::isfinite(a) || !std::isfinite(b) || !(a > 0.0) ||
        !(b > 0.0)) {
      std::ostringstream msg;
      msg << "GIG parameters must satisfy a > 0, b > 0 (got nu=" << nu << ", a=" << a
          << ", b=" << b << ")";
      throw InvalidParameter(msg.str());
    }
  }
};

struct WishartParams {
  double dof = 1.0;
  Eigen::MatrixXd scale;
};

struct MatrixNormalParams {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd row_cov;  // d1 x d1
  Eigen::MatrixXd col_cov;  // d2 x d2
};

inline double sample_gamma(Rng& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    std::ostringstream msg;
    msg << "Gamma parameters must be positive (got shape=" << shape << ", rate=" << rate << ")";
    throw InvalidParameter(msg.str());
  }
  if (shape < 1.0) {
    // Boost: G(a) = G(a + 1) * U^{1/a}, evaluated in log space.
    const double g = sample_gamma(rng, shape + 1.0, 1.0);
    const double u = rng.uniform();
    const double x = std::exp(std::log(g) + std::log(u) / shape) / rate;
    return x > 0.0 ? x : std::numeric_limits<double>::min();
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

inline double sample_beta(Rng& rng, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    std::ostringstream msg;
    msg << "Beta parameters must be positive (got a=" << a << ", b=" << b << ")";
    throw InvalidParameter(msg.str());
  }
  const double x = sample_gamma(rng, a, 1.0);
  const double y = sample_gamma(rng, b, 1.0);
  return x / (x + y);
}

namespace detail {

// Mode of the standardized GIG density x^{lambda-1} exp(-omega/2 (x + 1/x)), lambda >= 0.
inline double standard_gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) +
                             (lambda - 1.0)) / omega;
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// The three generators below follow Hörmann & Leydold, "Generating generalized
// inverse Gaussian random variates", Stat. Comput. 24 (2014). Each returns a
// draw from the standardized density with lambda >= 0.

// Ratio-of-uniforms without mode shift.
inline double standard_gig_rou_noshift(Rng& rng, double lambda, double omega) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = standard_gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) /
                    omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (;;) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Ratio-of-uniforms with shift by the mode; rectangle from Cardano's rule.
inline double standard_gig_rou_shift(Rng& rng, double lambda, double omega) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = standard_gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Extremes of (x - xm) sqrt(f(x)) are the roots of y^3 + a y^2 + b y + c in (0, xm), (xm, inf).
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;

  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);
  for (;;) {
    const double u = uminus + rng.uniform() * (uplus - uminus);
    const double v = rng.uniform();
    const double x = u / v + xm;
    if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Rejection from a piecewise hat that is constant on the log-concave part;
// for 0 <= lambda < 1 and small omega.
inline double standard_gig_concave_hat(Rng& rng, double lambda, double omega) {
  const double xm = standard_gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  const double area0 = k0 * x0;

  double k1, k2, area1, area2;
  if (x0 >= 2.0 / omega) {
    k1 = 0.0;
    area1 = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    area2 = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    area1 = lambda == 0.0 ? k1 * std::log(2.0 / (omega * omega))
                          : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    area2 = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = area0 + area1 + area2;

  for (;;) {
    double v = total * rng.uniform();
    double x, hx;
    if (v <= area0) {
      x = x0 * v / area0;
      hx = k0;
    } else if ((v -= area0) <= area1) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= area1;
      const double lo = std::max(x0, 2.0 / omega);
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = rng.uniform() * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
  }
}

}  // namespace detail

inline double sample_gig(Rng& rng, const GigParams& params) {
  params.validate();
  const double lambda = std::abs(params.nu);
  const double omega = std::sqrt(params.a * params.b);
  const double alpha = std::sqrt(params.a / params.b);

  // Gamma / inverse-gamma limits once the product a*b has degenerated.
  if (omega < 1e-100) {
    if (params.nu > 0.0 && params.a <= params.b) return sample_gamma(rng, params.nu, params.b / 2.0);
    if (params.nu < 0.0 && params.b <= params.a)
      return 1.0 / sample_gamma(rng, -params.nu, params.a / 2.0);
  }

  double x;
  if (lambda > 2.0 || omega > 3.0) {
    x = detail::standard_gig_rou_shift(rng, lambda, omega);
  } else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
    x = detail::standard_gig_rou_noshift(rng, lambda, omega);
  } else {
    x = detail::standard_gig_concave_hat(rng, lambda, omega);
  }
  return params.nu < 0.0 ? alpha / x : alpha * x;
}

/// Unnormalized GIG log-density (the Bessel constant is omitted).
/// Accepts the boundary cases a = 0 or b = 0 (gamma / inverse-gamma kernels).
inline double logpdf_gig(double x, const GigParams& params) {
  if (!(x > 0.0)) throw DomainError("logpdf_gig: x must be positive");
  if (params.a < 0.0 || params.b < 0.0) throw InvalidParameter("logpdf_gig: a, b must be >= 0");
  return (params.nu - 1.0) * std::log(x) - params.a / (2.0 * x) - params.b * x / 2.0;
}

/// Normalized Gamma(shape, rate) log-density.
inline double logpdf_gamma(double x, double shape, double rate) {
  if (!(x > 0.0)) throw DomainError("logpdf_gamma: x must be positive");
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

/// Normalized Beta(a, b) log-density.
inline double logpdf_beta(double x, double a, double b) {
  if (!(x > 0.0) || !(x < 1.0)) throw DomainError("logpdf_beta: x must lie in (0, 1)");
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

/// Lower Cholesky factor of an SPD matrix; throws InvalidParameter otherwise.
inline Eigen::MatrixXd spd_cholesky(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw DimensionMismatch(std::string(what) + " must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success || !m.allFinite())
    throw InvalidParameter(std::string(what) + " must be symmetric positive definite");
  return llt.matrixL();
}

inline Eigen::MatrixXd sample_wishart(Rng& rng, const WishartParams& params) {
  const Eigen::Index d = params.scale.rows();
  if (d == 0 || !(params.dof > static_cast<double>(d) - 1.0))
    throw InvalidParameter("Wishart degrees of freedom must exceed d - 1");
  if (!params.scale.isApprox(params.scale.transpose(), 1e-12))
    throw InvalidParameter("Wishart scale must be symmetric");
  const Eigen::MatrixXd chol = spd_cholesky(params.scale, "Wishart scale");

  // Bartlett decomposition.
  Eigen::MatrixXd bartlett = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    bartlett(i, i) = std::sqrt(2.0 * sample_gamma(rng, (params.dof - static_cast<double>(i)) / 2.0, 1.0));
    for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
  }
  const Eigen::MatrixXd factor = chol * bartlett;
  Eigen::MatrixXd draw = factor * factor.transpose();
  return 0.5 * (draw + draw.transpose());
}

/// Draws mean + row_factor * Z * col_factor^T with Z filled column-major by
/// standard normals. Callers that already hold factors of the covariances use
/// this directly.
inline Eigen::MatrixXd sample_matrix_normal_factored(Rng& rng, const Eigen::MatrixXd& mean,
                                                     const Eigen::MatrixXd& row_factor,
                                                     const Eigen::MatrixXd& col_factor) {
  Eigen::MatrixXd z(mean.rows(), mean.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = rng.normal();
  return mean + row_factor * z * col_factor.transpose();
}

inline Eigen::MatrixXd sample_matrix_normal(Rng& rng, const MatrixNormalParams& params) {
  if (params.row_cov.rows() != params.mean.rows() || params.row_cov.cols() != params.mean.rows() ||
      params.col_cov.rows() != params.mean.cols() || params.col_cov.cols() != params.mean.cols())
    throw DimensionMismatch("matrix normal: covariance shapes do not match the mean");
  return sample_matrix_normal_factored(rng, params.mean,
                                       spd_cholesky(params.row_cov, "row covariance"),
                                       spd_cholesky(params.col_cov, "column covariance"));
}

}  // namespace pggm

#endif  // PGGM_DISTRIBUTIONS_HPP
