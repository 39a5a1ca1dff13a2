#ifndef PGGM_TEST_SUPPORT_HPP
#define PGGM_TEST_SUPPORT_HPP

// Test-side oracles and generators, written independently of the library code.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "pggm/model.hpp"
#include "pggm/random.hpp"

namespace testing_support {

/// Composite Simpson rule on [lo, hi] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(lo + k * h);
  return s * h / 3.0;
}

/// E[X^k] under x^{nu-1} exp(-a/(2x) - b x/2), by Simpson's rule in log x.
inline double gig_moment(double nu, double a, double b, double k) {
  auto log_kernel = [&](double t, double power) {
    return (nu + power) * t - 0.5 * a * std::exp(-t) - 0.5 * b * std::exp(t);
  };
  // Centre the grid on the maximum of the t-density.
  double c = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double g = nu - 0.5 * b * std::exp(c) + 0.5 * a * std::exp(-c);
    const double dg = -0.5 * b * std::exp(c) - 0.5 * a * std::exp(-c);
    c -= g / dg;
  }
  const double shift = log_kernel(c, 0.0);
  const double z = simpson([&](double t) { return std::exp(log_kernel(t, 0.0) - shift); }, c - 50.0, c + 50.0, 200000);
  const double m = simpson([&](double t) { return std::exp(log_kernel(t, k) - shift); }, c - 50.0, c + 50.0, 200000);
  return m / z;
}

inline Eigen::MatrixXd random_spd(pggm::Rng& rng, Eigen::Index d, double ridge = 0.2) {
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) a(i, j) = rng.normal();
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(d) + ridge * Eigen::MatrixXd::Identity(d, d);
  return 0.5 * (s + s.transpose());
}

inline Eigen::MatrixXd random_matrix(pggm::Rng& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

struct MeanSd {
  double mean = 0.0, sd = 0.0;
};

inline MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  for (double x : v) r.sd += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(r.sd / static_cast<double>(v.size() - 1));
  return r;
}

/// |sample mean - expected| in units of the standard error sd / sqrt(n).
inline double z_score(const std::vector<double>& v, double expected, double sd) {
  const MeanSd m = mean_sd(v);
  return std::abs(m.mean - expected) / (sd / std::sqrt(static_cast<double>(v.size())));
}

/// A small random regression problem with Gaussian rows.
inline pggm::Dataset random_dataset(pggm::Rng& rng, Eigen::Index n, Eigen::Index p, Eigen::Index q) {
  pggm::Dataset d;
  d.X = random_matrix(rng, n, p);
  d.Y = random_matrix(rng, n, q);
  return d;
}

}  // namespace testing_support

#endif  // PGGM_TEST_SUPPORT_HPP
