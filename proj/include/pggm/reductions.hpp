#ifndef PGGM_REDUCTIONS_HPP
#define PGGM_REDUCTIONS_HPP

// Nested variants must reproduce each other draw for draw when their random
// streams are aligned:
//   gs with unit groups                      == s
//   sgs, pi_1 = 0, lambda_g = 1, one group   == s   (pi_2 plays pi, nu plays lambda)
//   sgs, pi_2 = 0, nu = 1, unit groups       == gs  (gamma plays ell)
// The first sgs case needs the group to stay non-zero (pi_1 = 0 forbids the
// all-zero group), so it runs on a strong-signal instance from a dense start.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "pggm/conditionals.hpp"
#include "pggm/diagnostics.hpp"

namespace pggm {

namespace detail {

inline double rel_diff(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) return std::numeric_limits<double>::infinity();
  if (x.size() == 0) return 0.0;
  return (x - y).cwiseAbs().maxCoeff() / (1.0 + y.cwiseAbs().maxCoeff());
}

struct ReductionPair {
  std::string name;
  Sampler reduced;
  Sampler reference;
  // Parameters of `reduced` expressed in the reference's coordinates.
  std::function<std::vector<Eigen::MatrixXd>(const ChainState&)> reduced_view;
  std::function<std::vector<Eigen::MatrixXd>(const ChainState&)> reference_view;
};

inline DiagnosticItem run_pair(ReductionPair& pair, std::uint64_t seed, int sweeps, double tol) {
  DiagnosticItem it;
  it.name = "reduction: " + pair.name;
  it.bound = tol;
  Rng r1(seed), r2(seed);
  bool masks_agree = true;
  int done = 0, zero_columns = 0;
  try {
    for (; done < sweeps; ++done) {
      pair.reduced.sweep(r1);
      pair.reference.sweep(r2);
      const ChainState &a = pair.reduced.state(), &b = pair.reference.state();
      masks_agree = masks_agree && a.active == b.active;
      zero_columns += static_cast<int>(std::count(b.active.begin(), b.active.end(), 0));
      const auto va = pair.reduced_view(a), vb = pair.reference_view(b);
      for (std::size_t k = 0; k < va.size(); ++k) it.measured = std::max(it.measured, rel_diff(va[k], vb[k]));
      if (!masks_agree) break;
    }
  } catch (const std::exception& e) {
    it.detail = std::string("error: ") + e.what();
    it.passed = false;
    return it;
  }
  it.passed = masks_agree && it.measured <= tol;
  it.detail = std::to_string(done) + " sweeps, " + std::to_string(zero_columns) + " zero column states" +
              (masks_agree ? "" : ", activity masks diverged");
  return it;
}

inline Eigen::MatrixXd scalar(double x) { return Eigen::MatrixXd::Constant(1, 1, x); }

inline Dataset reduction_data(Rng& rng, Eigen::Index n, Eigen::Index p, Eigen::Index q, double signal) {
  Dataset d;
  d.X.resize(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) d.X(i, j) = rng.normal();
  Eigen::MatrixXd B(p, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < p; ++i) B(i, j) = (i % 2 == 0 ? signal : 0.0) * (1.0 + 0.1 * static_cast<double>(j));
  d.Y = d.X * B;
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < n; ++i) d.Y(i, j) += rng.normal();
  return d;
}

}  // namespace detail

/// Runs the three reductions for `sweeps` Gibbs sweeps each. An item passes
/// when the activity masks agree at every sweep and all parameters agree to
/// `tol` (relative); the code paths differ in floating-point association, so
/// equality is not bitwise.
inline std::vector<DiagnosticItem> run_reduction_suite(std::uint64_t seed, int sweeps = 50, double tol = 1e-9) {
  using Views = std::function<std::vector<Eigen::MatrixXd>(const ChainState&)>;
  std::vector<DiagnosticItem> out;
  Rng master(seed);
  const Eigen::Index n = 40, p = 6, q = 2;

  {
    Rng dr = master.split(0);
    const Dataset data = detail::reduction_data(dr, n, p, q, 0.6);
    const auto g = GroupStructure::singletons(static_cast<int>(p));
    const Views view = [](const ChainState& s) {
      return std::vector<Eigen::MatrixXd>{s.Delta, s.Omega, s.lambda, detail::scalar(s.pi)};
    };
    detail::ReductionPair pair{"gs with unit groups == s",
                               Sampler(data, g, Hyperparameters::defaults(Variant::gs, q, g)),
                               Sampler(data, g, Hyperparameters::defaults(Variant::s, q, g)), view, view};
    out.push_back(detail::run_pair(pair, seed + 1, sweeps, tol));
  }

  {
    Rng dr = master.split(1);
    const Dataset data = detail::reduction_data(dr, n, p, q, 1.5);
    const auto single = GroupStructure::single(static_cast<int>(p));
    const auto unit = GroupStructure::singletons(static_cast<int>(p));
    Hyperparameters hs = Hyperparameters::defaults(Variant::s, q, unit);
    Hyperparameters hg = Hyperparameters::defaults(Variant::sgs, q, single);
    hg.identifiability = IdentifiabilityMode::fix_lambda;
    hg.fixed_pi = 0.0;
    hg.ell = hs.ell;
    hg.a2 = hs.a;
    hg.b2 = hs.b;
    Sampler reduced(data, single, hg), reference(data, unit, hs);
    // Dense start: every column at its least-squares value.
    const Eigen::MatrixXd start = -(data.X.colPivHouseholderQr().solve(data.Y)).transpose();
    ChainState a = reduced.state(), b = reference.state();
    a.Delta = b.Delta = start;
    reduced.set_state(a);
    reference.set_state(b);
    detail::ReductionPair pair{"sgs with pi_1 = 0, lambda = 1 == s", std::move(reduced), std::move(reference),
                               [](const ChainState& s) {
                                 return std::vector<Eigen::MatrixXd>{s.Delta, s.Omega, s.nu, detail::scalar(s.pi2)};
                               },
                               [](const ChainState& s) {
                                 return std::vector<Eigen::MatrixXd>{s.Delta, s.Omega, s.lambda, detail::scalar(s.pi)};
                               }};
    out.push_back(detail::run_pair(pair, seed + 2, sweeps, tol));
  }

  {
    Rng dr = master.split(2);
    const Dataset data = detail::reduction_data(dr, n, p, q, 0.6);
    const auto g = GroupStructure::singletons(static_cast<int>(p));
    Hyperparameters hgs = Hyperparameters::defaults(Variant::gs, q, g);
    Hyperparameters hg = Hyperparameters::defaults(Variant::sgs, q, g);
    hg.identifiability = IdentifiabilityMode::fix_nu;
    hg.fixed_pi2 = 0.0;
    hg.gamma = hgs.ell;
    detail::ReductionPair pair{"sgs with pi_2 = 0, nu = 1 == gs (unit groups)", Sampler(data, g, hg),
                               Sampler(data, g, hgs),
                               [](const ChainState& s) {
                                 return std::vector<Eigen::MatrixXd>{s.Delta, s.Omega, s.lambda, detail::scalar(s.pi)};
                               },
                               [](const ChainState& s) {
                                 return std::vector<Eigen::MatrixXd>{s.Delta, s.Omega, s.lambda, detail::scalar(s.pi)};
                               }};
    out.push_back(detail::run_pair(pair, seed + 3, sweeps, tol));
  }
  return out;
}

}  // namespace pggm

#endif  // PGGM_REDUCTIONS_HPP
