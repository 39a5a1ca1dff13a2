#ifndef PGGM_DIAGNOSTICS_HPP
#define PGGM_DIAGNOSTICS_HPP

// Self-checks of the distribution layer against moments obtained by numerical
// quadrature or closed forms. Used by `pggm_cli validate`.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "pggm/distributions.hpp"
#include "pggm/mgig.hpp"
#include "pggm/random.hpp"

namespace pggm {

struct DiagnosticItem {
  std::string name;
  double measured = 0.0;  // |deviation| (or relative error)
  double bound = 0.0;
  bool passed = false;
  std::string detail;
};

/// E[X^k] of GIG(nu, a, b) by the trapezoid rule on t = log x, where the
/// integrand decays doubly exponentially and the rule converges very fast.
inline double gig_quadrature_moment(const GigParams& p, int k) {
  p.validate();
  const double mode = std::log(((p.nu - 1.0) + std::sqrt((p.nu - 1.0) * (p.nu - 1.0) + p.a * p.b)) / p.b);
  auto log_f = [&](double t, int power) {
    return (p.nu + power) * t - 0.5 * p.a * std::exp(-t) - 0.5 * p.b * std::exp(t);
  };
  const double shift = log_f(mode, 0);
  const double h = 1e-3;
  double z = 0.0, m = 0.0;
  for (double t = mode - 40.0; t <= mode + 40.0; t += h) {
    const double f0 = log_f(t, 0) - shift;
    if (f0 < -745.0) continue;
    z += std::exp(f0);
    m += std::exp(log_f(t, k) - shift);
  }
  return m / z;
}

namespace detail {

inline DiagnosticItem mean_band(const std::string& name, double sample_mean, double expected, double sd,
                                std::size_t n) {
  DiagnosticItem it;
  it.name = name;
  const double se = sd / std::sqrt(static_cast<double>(n));
  it.measured = std::abs(sample_mean - expected) / se;
  it.bound = 3.0;
  it.passed = it.measured <= it.bound;
  std::ostringstream d;
  d.precision(6);
  d << "sample mean " << sample_mean << ", expected " << expected << " (" << it.measured << " s.e.)";
  it.detail = d.str();
  return it;
}

inline Eigen::MatrixXd random_spd_matrix(Rng& rng, Eigen::Index d) {
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) a(i, j) = rng.normal();
  Eigen::MatrixXd s = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
  return 0.5 * (s + s.transpose());
}

}  // namespace detail

/// Sample mean of n GIG draws against the quadrature mean, 3 s.e. band.
inline DiagnosticItem check_gig_mean(Rng& rng, const GigParams& p, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += sample_gig(rng, p);
  const double m1 = gig_quadrature_moment(p, 1), m2 = gig_quadrature_moment(p, 2);
  std::ostringstream name;
  name << "GIG(" << p.nu << ", " << p.a << ", " << p.b << ") mean vs quadrature";
  return detail::mean_band(name.str(), sum / static_cast<double>(n), m1, std::sqrt(m2 - m1 * m1), n);
}

/// 1/X for X ~ GIG(nu, a, b) is GIG(-nu, b, a): compare the mean of 1/X with
/// the quadrature mean of the reciprocal law.
inline DiagnosticItem check_gig_reciprocal(Rng& rng, const GigParams& p, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += 1.0 / sample_gig(rng, p);
  const GigParams r{-p.nu, p.b, p.a};
  const double m1 = gig_quadrature_moment(r, 1), m2 = gig_quadrature_moment(r, 2);
  std::ostringstream name;
  name << "GIG(" << p.nu << ", " << p.a << ", " << p.b << ") reciprocal mean";
  return detail::mean_band(name.str(), sum / static_cast<double>(n), m1, std::sqrt(m2 - m1 * m1), n);
}

inline DiagnosticItem check_gamma_mean(Rng& rng, double shape, double rate, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += sample_gamma(rng, shape, rate);
  std::ostringstream name;
  name << "Gamma(" << shape << ", " << rate << ") mean";
  return detail::mean_band(name.str(), sum / static_cast<double>(n), shape / rate, std::sqrt(shape) / rate, n);
}

inline DiagnosticItem check_beta_mean(Rng& rng, double a, double b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += sample_beta(rng, a, b);
  const double mean = a / (a + b);
  const double var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
  std::ostringstream name;
  name << "Beta(" << a << ", " << b << ") mean";
  return detail::mean_band(name.str(), sum / static_cast<double>(n), mean, std::sqrt(var), n);
}

/// Entrywise mean of Wishart draws against u V; the worst entry is reported.
inline DiagnosticItem check_wishart_mean(Rng& rng, const WishartParams& p, std::size_t n) {
  const Eigen::Index d = p.scale.rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t k = 0; k < n; ++k) sum += sample_wishart(rng, p);
  sum /= static_cast<double>(n);
  DiagnosticItem worst;
  worst.name = "Wishart mean";
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double var = p.dof * (p.scale(i, j) * p.scale(i, j) + p.scale(i, i) * p.scale(j, j));
      DiagnosticItem it = detail::mean_band("Wishart mean", sum(i, j), p.dof * p.scale(i, j), std::sqrt(var), n);
      if (it.measured >= worst.measured) worst = it;
    }
  }
  worst.name = "Wishart(" + std::to_string(p.dof) + ", " + std::to_string(d) + "x" + std::to_string(d) + ") mean";
  return worst;
}

/// Relative Riccati residual of the MGIG mode on `count` random SPD pairs.
inline DiagnosticItem check_riccati_random(Rng& rng, int count, double tol = 1e-10) {
  DiagnosticItem it;
  it.name = "Riccati residual on random SPD pairs";
  it.bound = tol;
  int failures = 0;
  for (int k = 0; k < count; ++k) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.uniform_index(5));
    MgigParams p;
    p.A = detail::random_spd_matrix(rng, d);
    p.B = detail::random_spd_matrix(rng, d);
    p.nu = -3.0 + 10.0 * rng.uniform();
    try {
      const RiccatiSolution s = mgig_mode(p);
      const double rel = riccati_residual_norm(p, s.mode) / p.A.norm();
      it.measured = std::max(it.measured, rel);
      if (!(rel <= tol)) ++failures;
    } catch (const std::exception&) {
      ++failures;
    }
  }
  it.passed = failures == 0;
  it.detail = std::to_string(count) + " pairs, " + std::to_string(failures) + " failures";
  return it;
}

/// Commuting A, B: the mode is diagonal in the shared eigenbasis with entries
/// given by the scalar quadratic b m^2 + c m - a = 0.
inline DiagnosticItem check_riccati_commuting(Rng& rng, int count, double tol = 1e-10) {
  DiagnosticItem it;
  it.name = "Riccati mode vs eigen oracle (commuting case)";
  it.bound = tol;
  for (int k = 0; k < count; ++k) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.uniform_index(4));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::random_spd_matrix(rng, d));
    const Eigen::MatrixXd Q = es.eigenvectors();
    Eigen::VectorXd a(d), b(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      a(i) = 0.1 + 3.0 * rng.uniform();
      b(i) = 0.1 + 3.0 * rng.uniform();
    }
    MgigParams p;
    p.nu = -2.0 + 8.0 * rng.uniform();
    p.A = Q * a.asDiagonal() * Q.transpose();
    p.B = Q * b.asDiagonal() * Q.transpose();
    p.A = (0.5 * (p.A + p.A.transpose())).eval();
    p.B = (0.5 * (p.B + p.B.transpose())).eval();
    const double c = p.linear_coefficient();
    Eigen::VectorXd m(d);
    for (Eigen::Index i = 0; i < d; ++i) m(i) = 2.0 * a(i) / (c + std::sqrt(c * c + 4.0 * a(i) * b(i)));
    const Eigen::MatrixXd oracle = Q * m.asDiagonal() * Q.transpose();
    try {
      const RiccatiSolution s = mgig_mode(p);
      it.measured = std::max(it.measured, (s.mode - oracle).norm() / oracle.norm());
    } catch (const std::exception&) {
      it.measured = INFINITY;
    }
  }
  it.passed = it.measured <= tol;
  it.detail = std::to_string(count) + " commuting pairs";
  return it;
}

/// q = 1: the Riccati mode equals the closed-form GIG mode, and the draw path
/// reproduces sample_gig on an identical stream.
inline std::vector<DiagnosticItem> check_mgig_scalar(Rng& rng, int count) {
  DiagnosticItem mode;
  mode.name = "scalar MGIG mode vs GIG mode";
  mode.bound = 1e-12;
  DiagnosticItem draw;
  draw.name = "scalar MGIG draw path vs GIG sampler";
  draw.bound = 0.0;
  for (int k = 0; k < count; ++k) {
    const double nu = -3.0 + 8.0 * rng.uniform(), a = 0.05 + 5.0 * rng.uniform(), b = 0.05 + 5.0 * rng.uniform();
    MgigParams p{nu, Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Constant(1, 1, b)};
    // Cancellation-free root of b x^2 - 2 (nu - 1) x - a = 0.
    const double h = nu - 1.0, disc = std::sqrt(h * h + a * b);
    const double closed = h >= 0.0 ? (h + disc) / b : a / (disc - h);
    const double riccati = mgig_mode(p).mode(0, 0);
    mode.measured = std::max(mode.measured, std::abs(riccati - closed) / closed);
    Rng r1(1000 + static_cast<std::uint64_t>(k)), r2(1000 + static_cast<std::uint64_t>(k));
    const double x1 = mgig_draw_or_mode(r1, p)(0, 0);
    const double x2 = sample_gig(r2, GigParams{nu, a, b});
    draw.measured = std::max(draw.measured, std::abs(x1 - x2));
  }
  mode.passed = mode.measured <= mode.bound;
  draw.passed = draw.measured == 0.0;
  mode.detail = draw.detail = std::to_string(count) + " parameter sets";
  return {mode, draw};
}

/// The full distribution self-check with `n` draws per moment test.
inline std::vector<DiagnosticItem> run_distribution_suite(std::uint64_t seed, std::size_t n = 100000) {
  Rng master(seed);
  std::uint64_t s = 0;
  std::vector<DiagnosticItem> out;
  const GigParams gigs[] = {{0.5, 1.0, 1.0}, {-1.5, 2.0, 0.5}, {3.0, 0.2, 4.0}, {0.2, 0.01, 0.02}, {-0.3, 50.0, 40.0}};
  for (const auto& p : gigs) {
    Rng r1 = master.split(s++), r2 = master.split(s++);
    out.push_back(check_gig_mean(r1, p, n));
    out.push_back(check_gig_reciprocal(r2, p, n));
  }
  {
    Rng r = master.split(s++);
    out.push_back(check_gamma_mean(r, 0.7, 2.0, n));
    out.push_back(check_gamma_mean(r, 5.0, 0.5, n));
    out.push_back(check_beta_mean(r, 0.5, 3.0, n));
    out.push_back(check_beta_mean(r, 40.0, 2.0, n));
  }
  {
    Rng r = master.split(s++);
    Eigen::MatrixXd v(3, 3);
    v << 1.0, 0.3, 0.1, 0.3, 2.0, -0.4, 0.1, -0.4, 0.5;
    out.push_back(check_wishart_mean(r, WishartParams{5.5, v}, n / 10));
  }
  {
    Rng r = master.split(s++);
    out.push_back(check_riccati_random(r, 100));
    out.push_back(check_riccati_commuting(r, 100));
    for (auto& it : check_mgig_scalar(r, 50)) out.push_back(it);
  }
  return out;
}

}  // namespace pggm

#endif  // PGGM_DIAGNOSTICS_HPP
