#ifndef PGGM_ORACLE_HPP
#define PGGM_ORACLE_HPP

// Unnormalized joint posterior log p(Delta, Omega, lambda, nu, pi | Y, X) of
// each variant, written directly from the hierarchical model without any of
// the sampler's cached quantities, and the coherence check that compares it
// with the implemented full conditionals.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pggm/conditionals.hpp"
#include "pggm/distributions.hpp"
#include "pggm/model.hpp"
#include "pggm/random.hpp"

namespace pggm {

namespace detail {

// log N_q(x; 0, scale * Omega) given the Cholesky factor of Omega.
inline double log_normal_scaled(const Eigen::VectorXd& x, double scale, const Eigen::LLT<Eigen::MatrixXd>& omega) {
  const double q = static_cast<double>(x.size());
  const Eigen::MatrixXd l = omega.matrixL();
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  const double quad = x.dot(omega.solve(x));
  return -0.5 * q * std::log(2.0 * std::numbers::pi * scale) - 0.5 * logdet - 0.5 * quad / scale;
}

inline bool is_zero(const Eigen::VectorXd& x) { return (x.array() == 0.0).all(); }

}  // namespace detail

inline double log_full_posterior(const Dataset& data, const GroupStructure& groups,
                                 const Hyperparameters& h, const ChainState& st) {
  const Eigen::Index q = data.q(), p = data.p();
  const double n = static_cast<double>(data.n());
  Eigen::LLT<Eigen::MatrixXd> omega(st.Omega);
  if (omega.info() != Eigen::Success) throw NumericalError("oracle: Omega not SPD");
  const Eigen::MatrixXd l = omega.matrixL();
  const double logdet = 2.0 * l.diagonal().array().log().sum();

  // Likelihood: rows of Y ~ N(B^T x_k, Omega^{-1}), B = -Delta^T Omega^{-1}.
  const Eigen::MatrixXd B = -omega.solve(st.Delta).transpose();
  const Eigen::MatrixXd resid = data.Y - data.X * B;
  double lp = 0.5 * n * logdet - 0.5 * (resid * l).squaredNorm() -
              0.5 * n * static_cast<double>(q) * std::log(2.0 * std::numbers::pi);

  // Delta prior.
  switch (h.variant) {
    case Variant::none:
      for (Eigen::Index i = 0; i < p; ++i) lp += detail::log_normal_scaled(st.Delta.col(i), st.lambda(i), omega);
      break;
    case Variant::s:
      for (Eigen::Index i = 0; i < p; ++i) {
        const Eigen::VectorXd d = st.Delta.col(i);
        lp += detail::is_zero(d) ? std::log(st.pi)
                                 : std::log(1.0 - st.pi) + detail::log_normal_scaled(d, st.lambda(i), omega);
      }
      break;
    case Variant::gs:
      for (int g = 0; g < groups.m(); ++g) {
        bool zero = true;
        double slab = std::log(1.0 - st.pi);
        for (int j = groups.start(g); j < groups.start(g) + groups.size(g); ++j) {
          const Eigen::VectorXd d = st.Delta.col(j);
          zero = zero && detail::is_zero(d);
          slab += detail::log_normal_scaled(d, st.lambda(g), omega);
        }
        lp += zero ? std::log(st.pi) : slab;
      }
      break;
    case Variant::sgs:
      for (int g = 0; g < groups.m(); ++g) {
        bool zero = true;
        double inner = std::log(1.0 - st.pi);
        for (int j = groups.start(g); j < groups.start(g) + groups.size(g); ++j) {
          const Eigen::VectorXd d = st.Delta.col(j);
          if (detail::is_zero(d)) {
            inner += std::log(st.pi2);
          } else {
            zero = false;
            inner += std::log(1.0 - st.pi2) + detail::log_normal_scaled(d, st.nu(j) * st.lambda(g), omega);
          }
        }
        lp += zero ? std::log(st.pi) : inner;
      }
      break;
  }

  // Shrinkage priors.
  switch (h.variant) {
    case Variant::none:
    case Variant::s:
      for (Eigen::Index i = 0; i < p; ++i) lp += logpdf_gamma(st.lambda(i), alpha_sparse(q), h.ell(i));
      break;
    case Variant::gs:
      for (int g = 0; g < groups.m(); ++g) lp += logpdf_gamma(st.lambda(g), alpha_group(q, groups.size(g)), h.ell(g));
      break;
    case Variant::sgs:
      for (int g = 0; g < groups.m(); ++g)
        lp += logpdf_gamma(st.lambda(g), alpha_group(q, groups.size(g)), h.gamma(g));
      for (Eigen::Index i = 0; i < p; ++i) lp += logpdf_gamma(st.nu(i), alpha_sparse(q), h.ell(i));
      break;
  }

  // Wishart_q(u, V) kernel.
  const Eigen::MatrixXd v_inv = h.V.llt().solve(Eigen::MatrixXd::Identity(q, q));
  lp += 0.5 * (h.u - static_cast<double>(q) - 1.0) * logdet - 0.5 * (v_inv * st.Omega).trace();

  // Spike probabilities.
  if (h.variant != Variant::none) {
    if (!h.fixed_pi) lp += logpdf_beta(st.pi, h.a, h.b);
    if (h.variant == Variant::sgs && !h.fixed_pi2) lp += logpdf_beta(st.pi2, h.a2, h.b2);
  }
  return lp;
}

struct CoherenceCheck {
  std::string variant;
  std::string block;
  int q = 0;
  double conditional_diff = 0.0;  // log c(theta') - log c(theta)
  double joint_diff = 0.0;        // log p(theta', rest) - log p(theta, rest)
  double rel_error = 0.0;
  bool passed = false;
};

struct CoherenceReport {
  std::vector<CoherenceCheck> checks;
  double tolerance = 1e-8;
  double max_rel_error = 0.0;
  int failures = 0;
  bool passed() const { return failures == 0 && !checks.empty(); }
};

struct CoherenceOptions {
  std::uint64_t seed = 2024;
  int instances = 8;        // random (data, hyper, state) instances per (variant, q)
  int n = 12, p = 6, m = 3;
  std::vector<int> qs = {1, 2};
  double tolerance = 1e-8;
  bool flip_slab_mean = false;  // mutation hook: must make the check fail
};

namespace detail {

inline Eigen::MatrixXd random_spd(Rng& rng, Eigen::Index q) {
  Eigen::MatrixXd a(q, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < q; ++i) a(i, j) = rng.normal();
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(q) + 0.5 * Eigen::MatrixXd::Identity(q, q);
  return 0.5 * (s + s.transpose());
}

inline double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline Eigen::VectorXd random_normal_vector(Rng& rng, Eigen::Index q, double scale) {
  Eigen::VectorXd v(q);
  for (Eigen::Index r = 0; r < q; ++r) v(r) = scale * rng.normal();
  return v;
}

}  // namespace detail

/// For each variant, each q and each parameter block, draws pairs of states
/// differing only in that block and compares the log-ratio of the implemented
/// conditional density with the log-ratio of the joint.
inline CoherenceReport run_coherence_suite(const CoherenceOptions& opt = {}) {
  CoherenceReport report;
  report.tolerance = opt.tolerance;
  Rng master(opt.seed);
  std::uint64_t stream = 0;
  const std::vector<int> sizes = [&] {
    std::vector<int> s(static_cast<std::size_t>(opt.m), opt.p / opt.m);
    s.back() += opt.p - opt.m * (opt.p / opt.m);
    return s;
  }();
  const GroupStructure groups(sizes);

  for (Variant v : {Variant::s, Variant::gs, Variant::sgs}) {
    for (int q : opt.qs) {
      for (int inst = 0; inst < opt.instances; ++inst) {
        Rng rng = master.split(stream++);
        Dataset data;
        data.X.resize(opt.n, opt.p);
        data.Y.resize(opt.n, q);
        for (Eigen::Index j = 0; j < opt.p; ++j)
          for (Eigen::Index k = 0; k < opt.n; ++k) data.X(k, j) = rng.normal();
        for (Eigen::Index j = 0; j < q; ++j)
          for (Eigen::Index k = 0; k < opt.n; ++k) data.Y(k, j) = rng.normal();

        Hyperparameters h = Hyperparameters::defaults(v, q, groups);
        for (Eigen::Index k = 0; k < h.ell.size(); ++k) h.ell(k) = detail::uniform_in(rng, 0.3, 3.0);
        for (Eigen::Index k = 0; k < h.gamma.size(); ++k) h.gamma(k) = detail::uniform_in(rng, 0.3, 3.0);
        h.u = q + detail::uniform_in(rng, 0.5, 3.0);
        h.V = detail::random_spd(rng, q);
        h.a = detail::uniform_in(rng, 0.5, 4.0);
        h.b = detail::uniform_in(rng, 0.5, 4.0);
        h.a2 = detail::uniform_in(rng, 0.5, 4.0);
        h.b2 = detail::uniform_in(rng, 0.5, 4.0);

        // Random state with exact-zero columns / groups.
        ChainState st;
        st.Delta = Eigen::MatrixXd::Zero(q, opt.p);
        for (int g = 0; g < groups.m(); ++g) {
          const bool group_zero = rng.uniform() < 0.35;
          for (int j = groups.start(g); j < groups.start(g) + groups.size(g); ++j) {
            const bool zero = group_zero || (v != Variant::gs && rng.uniform() < 0.35);
            if (!zero) st.Delta.col(j) = detail::random_normal_vector(rng, q, 0.8);
          }
        }
        st.Omega = detail::random_spd(rng, q);
        const Eigen::Index nl = v == Variant::s ? opt.p : groups.m();
        st.lambda.resize(nl);
        for (Eigen::Index k = 0; k < nl; ++k) st.lambda(k) = detail::uniform_in(rng, 0.2, 3.0);
        if (v == Variant::sgs) {
          st.nu.resize(opt.p);
          for (Eigen::Index k = 0; k < opt.p; ++k) st.nu(k) = detail::uniform_in(rng, 0.2, 3.0);
        }
        st.pi = detail::uniform_in(rng, 0.05, 0.95);
        st.pi2 = v == Variant::sgs ? detail::uniform_in(rng, 0.05, 0.95) : 0.0;

        Sampler sampler(data, groups, h);
        sampler.set_slab_mean_sign(opt.flip_slab_mean ? -1.0 : 1.0);

        auto record = [&](const std::string& block, const ChainState& s1, const ChainState& s2,
                          double c1, double c2) {
          CoherenceCheck c;
          c.variant = to_string(v);
          c.block = block;
          c.q = q;
          c.conditional_diff = c2 - c1;
          c.joint_diff = log_full_posterior(data, groups, h, s2) - log_full_posterior(data, groups, h, s1);
          c.rel_error = std::abs(c.conditional_diff - c.joint_diff) / std::max(1.0, std::abs(c.joint_diff));
          c.passed = std::isfinite(c.rel_error) && c.rel_error <= opt.tolerance;
          report.max_rel_error = std::max(report.max_rel_error, std::isfinite(c.rel_error) ? c.rel_error : INFINITY);
          if (!c.passed) ++report.failures;
          report.checks.push_back(c);
        };

        // Delta blocks: transitions slab->slab, slab->spike, spike->slab.
        for (int rep = 0; rep < 3; ++rep) {
          if (v == Variant::gs) {
            const int g = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(groups.m())));
            const int st0 = groups.start(g), k = groups.size(g);
            ChainState s1 = st;
            ChainState s2 = st;
            Eigen::MatrixXd x1(q, k), x2(q, k);
            for (int j = 0; j < k; ++j) {
              x1.col(j) = detail::random_normal_vector(rng, q, 0.8);
              x2.col(j) = detail::random_normal_vector(rng, q, 0.8);
            }
            if (rep == 1) x2.setZero();
            if (rep == 2) x1.setZero();
            s1.Delta.middleCols(st0, k) = x1;
            s2.Delta.middleCols(st0, k) = x2;
            sampler.set_state(s1);
            record("Delta_g", s1, s2, sampler.log_conditional_delta_group(g, x1),
                   sampler.log_conditional_delta_group(g, x2));
          } else {
            const int i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(opt.p)));
            ChainState s1 = st;
            ChainState s2 = st;
            Eigen::VectorXd x1 = detail::random_normal_vector(rng, q, 0.8);
            Eigen::VectorXd x2 = detail::random_normal_vector(rng, q, 0.8);
            if (rep == 1) x2.setZero();
            if (rep == 2) x1.setZero();
            s1.Delta.col(i) = x1;
            s2.Delta.col(i) = x2;
            sampler.set_state(s1);
            record(v == Variant::sgs ? "Delta_gi" : "Delta_i", s1, s2,
                   sampler.log_conditional_delta_column(i, x1), sampler.log_conditional_delta_column(i, x2));
          }
        }

        // Omega: exact GIG for q = 1, MGIG kernel for q > 1.
        {
          ChainState s1 = st;
          ChainState s2 = st;
          s2.Omega = detail::random_spd(rng, q);
          sampler.set_state(s1);
          record(q == 1 ? "omega" : "Omega (MGIG kernel)", s1, s2, sampler.log_conditional_omega(s1.Omega),
                 sampler.log_conditional_omega(s2.Omega));
        }

        // lambda (every index) and nu.
        for (Eigen::Index k = 0; k < st.lambda.size(); ++k) {
          ChainState s1 = st;
          ChainState s2 = st;
          s2.lambda(k) = detail::uniform_in(rng, 0.2, 3.0);
          sampler.set_state(s1);
          record("lambda", s1, s2, sampler.log_conditional_lambda(static_cast<int>(k), s1.lambda(k)),
                 sampler.log_conditional_lambda(static_cast<int>(k), s2.lambda(k)));
        }
        if (v == Variant::sgs) {
          for (Eigen::Index k = 0; k < st.nu.size(); ++k) {
            ChainState s1 = st;
            ChainState s2 = st;
            s2.nu(k) = detail::uniform_in(rng, 0.2, 3.0);
            sampler.set_state(s1);
            record("nu", s1, s2, sampler.log_conditional_nu(static_cast<int>(k), s1.nu(k)),
                   sampler.log_conditional_nu(static_cast<int>(k), s2.nu(k)));
          }
        }

        {
          ChainState s1 = st;
          ChainState s2 = st;
          s2.pi = detail::uniform_in(rng, 0.05, 0.95);
          sampler.set_state(s1);
          record(v == Variant::sgs ? "pi_1" : "pi", s1, s2, sampler.log_conditional_pi(s1.pi),
                 sampler.log_conditional_pi(s2.pi));
        }
        if (v == Variant::sgs) {
          ChainState s1 = st;
          ChainState s2 = st;
          s2.pi2 = detail::uniform_in(rng, 0.05, 0.95);
          sampler.set_state(s1);
          record("pi_2", s1, s2, sampler.log_conditional_pi2(s1.pi2), sampler.log_conditional_pi2(s2.pi2));
        }
      }
    }
  }
  return report;
}

}  // namespace pggm

#endif  // PGGM_ORACLE_HPP
