#ifndef PGGM_CONDITIONALS_HPP
#define PGGM_CONDITIONALS_HPP

// Full conditional updates for the four samplers. The Sampler owns the
// current ChainState together with the cached products that make a column
// update O(q p):
//
//   G = Delta X^T X   (q x p, updated by rank-one / rank-kappa corrections)
//   W = Omega Y^T X   (q x p, recomputed whenever Omega changes)
//
// so that H_i = W_i + G_i - ||X_i||^2 Delta_i.

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pggm/distributions.hpp"
#include "pggm/errors.hpp"
#include "pggm/mgig.hpp"
#include "pggm/model.hpp"
#include "pggm/random.hpp"

namespace pggm {

struct GramCache {
  Eigen::Index n = 0, p = 0, q = 0;
  Eigen::MatrixXd XtX;  // p x p
  Eigen::MatrixXd YtX;  // q x p
  Eigen::MatrixXd YtY;  // q x q
  Eigen::VectorXd col_sqnorm;

  static GramCache build(const Dataset& data) {
    data.validate();
    GramCache g;
    g.n = data.n();
    g.p = data.p();
    g.q = data.q();
    g.XtX = data.X.transpose() * data.X;
    g.YtX = data.Y.transpose() * data.X;
    g.YtY = data.Y.transpose() * data.Y;
    g.col_sqnorm = g.XtX.diagonal();
    return g;
  }
};

/// P(spike) = sigmoid(log_spike - log_slab), without overflow.
inline double spike_probability(double log_spike, double log_slab) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (std::isnan(log_spike) || std::isnan(log_slab))
    throw NumericalError("spike probability: NaN log-weight");
  if (log_spike == -inf && log_slab == -inf)
    throw NumericalError("spike probability: both spike and slab have zero weight");
  if (log_spike == -inf || log_slab == inf) return 0.0;
  if (log_slab == -inf || log_spike == inf) return 1.0;
  const double d = log_spike - log_slab;
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

inline double log_sum_exp(double a, double b) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (a == -inf) return b;
  if (b == -inf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// Spike-and-slab conditional of one column (s, none, sgs): Delta_i is 0 with
/// probability p_spike, otherwise N_q(mean, s Omega).
struct ColumnConditional {
  Eigen::VectorXd mean;
  double s = 0.0;
  double log_spike = 0.0;  // log prior spike weight
  double log_slab = 0.0;   // log slab weight after integrating Delta_i out
  double p_spike = 0.0;
};

/// Group conditional (gs): the block is 0 with probability p_spike, otherwise
/// MN_{q x kappa}(mean, Omega, S) with S = lambda P^{-1}, P = I + lambda X_g^T X_g.
struct GroupConditional {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd chol_P;
  double lambda = 0.0;
  double logdet_P = 0.0;
  double log_spike = 0.0;
  double log_slab = 0.0;
  double p_spike = 0.0;
};

struct OmegaConditional {
  double nu = 0.0;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

class Sampler {
 public:
  Sampler(const Dataset& data, GroupStructure groups, Hyperparameters hyper,
          RiccatiOptions riccati = {})
      : gram_(GramCache::build(data)),
        groups_(std::move(groups)),
        hyper_(std::move(hyper)),
        riccati_(riccati) {
    groups_.check_columns(gram_.p);
    hyper_.validate(gram_.q, groups_);
    B_omega_ = gram_.YtY + hyper_.V.llt().solve(Eigen::MatrixXd::Identity(gram_.q, gram_.q));
    B_omega_ = (0.5 * (B_omega_ + B_omega_.transpose())).eval();
    set_state(initial_state());
  }

  const GramCache& gram() const { return gram_; }
  const GroupStructure& groups() const { return groups_; }
  const Hyperparameters& hyper() const { return hyper_; }
  Variant variant() const { return hyper_.variant; }
  Eigen::Index p() const { return gram_.p; }
  Eigen::Index q() const { return gram_.q; }
  int m() const { return groups_.m(); }
  const ChainState& state() const { return state_; }
  int last_riccati_iterations() const { return last_riccati_iterations_; }

  /// Replaces the shrinkage rates (ell, gamma); used by the EM step.
  void set_rates(const Eigen::VectorXd& ell, const Eigen::VectorXd& gamma) {
    Hyperparameters h = hyper_;
    h.ell = ell;
    h.gamma = gamma;
    h.validate(gram_.q, groups_);
    hyper_ = std::move(h);
  }

  /// Test hook: multiplies every slab mean by `sign` (1 in normal operation).
  void set_slab_mean_sign(double sign) { slab_mean_sign_ = sign; }

  /// Delta = 0, Omega = u V, shrinkage factors and spike probabilities at
  /// their prior means (or fixed values).
  ChainState initial_state() const {
    ChainState s;
    const Eigen::Index q = gram_.q, p = gram_.p;
    s.Delta = Eigen::MatrixXd::Zero(q, p);
    s.active.assign(static_cast<std::size_t>(p), 0);
    s.Omega = hyper_.u * hyper_.V;
    switch (hyper_.variant) {
      case Variant::none:
      case Variant::s:
        s.lambda = Eigen::VectorXd::Constant(p, alpha_sparse(q)).cwiseQuotient(hyper_.ell);
        break;
      case Variant::gs:
        s.lambda.resize(m());
        for (int g = 0; g < m(); ++g) s.lambda(g) = alpha_group(q, groups_.size(g)) / hyper_.ell(g);
        break;
      case Variant::sgs:
        s.lambda.resize(m());
        for (int g = 0; g < m(); ++g)
          s.lambda(g) = hyper_.identifiability == IdentifiabilityMode::fix_lambda
                            ? 1.0
                            : alpha_group(q, groups_.size(g)) / hyper_.gamma(g);
        s.nu = hyper_.identifiability == IdentifiabilityMode::fix_nu
                   ? Eigen::VectorXd::Ones(p)
                   : Eigen::VectorXd(Eigen::VectorXd::Constant(p, alpha_sparse(q)).cwiseQuotient(hyper_.ell));
        break;
    }
    s.pi = hyper_.fixed_pi ? *hyper_.fixed_pi : hyper_.a / (hyper_.a + hyper_.b);
    s.pi2 = hyper_.variant == Variant::sgs
                ? (hyper_.fixed_pi2 ? *hyper_.fixed_pi2 : hyper_.a2 / (hyper_.a2 + hyper_.b2))
                : 0.0;
    return s;
  }

  void set_state(ChainState s) {
    const Eigen::Index q = gram_.q, p = gram_.p;
    if (s.Delta.rows() != q || s.Delta.cols() != p) throw DimensionMismatch("state: Delta must be q x p");
    if (s.Omega.rows() != q || s.Omega.cols() != q) throw DimensionMismatch("state: Omega must be q x q");
    const Eigen::Index lambda_len = (hyper_.variant == Variant::gs || hyper_.variant == Variant::sgs) ? m() : p;
    if (s.lambda.size() != lambda_len) throw DimensionMismatch("state: wrong number of lambda values");
    if (hyper_.variant == Variant::sgs && s.nu.size() != p) throw DimensionMismatch("state: nu must have p values");
    if (hyper_.variant != Variant::sgs && s.nu.size() != 0) throw DimensionMismatch("state: nu is only used by sgs");
    s.active.resize(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i)
      s.active[static_cast<std::size_t>(i)] = !(s.Delta.col(i).array() == 0.0).all();
    s.validate();
    state_ = std::move(s);
    group_active_.assign(static_cast<std::size_t>(m()), 0);
    for (Eigen::Index i = 0; i < p; ++i)
      if (state_.active[static_cast<std::size_t>(i)]) ++group_active_[static_cast<std::size_t>(groups_.group_of(static_cast<int>(i)))];
    refresh_delta_products();
    refresh_omega_products();
  }

  // ---- sparsity bookkeeping ------------------------------------------------

  SparsityCounters counters() const {
    SparsityCounters c;
    c.N0g.resize(static_cast<std::size_t>(m()));
    for (int g = 0; g < m(); ++g) {
      const int zeros = groups_.size(g) - group_active_[static_cast<std::size_t>(g)];
      c.N0g[static_cast<std::size_t>(g)] = zeros;
      c.N0 += zeros;
      if (group_active_[static_cast<std::size_t>(g)] == 0)
        ++c.G0;
      else
        c.J0 += zeros;
    }
    return c;
  }

  /// Recomputes counters and cached products from scratch and checks them
  /// against the incrementally maintained ones.
  void check_invariants() const {
    if (!(count_sparsity(state_.Delta, groups_) == counters()))
      throw NumericalError("sparsity counters drifted from the exact-zero structure of Delta");
    state_.validate();
    const Eigen::MatrixXd g_exact = state_.Delta * gram_.XtX;
    const double scale = 1.0 + g_exact.norm();
    if ((g_exact - G_).norm() > 1e-8 * scale) throw NumericalError("cached Delta X^T X drifted");
  }

  // ---- Delta ---------------------------------------------------------------

  Eigen::VectorXd h_column(int i) const {
    return W_.col(i) + G_.col(i) - gram_.col_sqnorm(i) * state_.Delta.col(i);
  }

  Eigen::MatrixXd h_group(int g) const {
    const int st = groups_.start(g), k = groups_.size(g);
    return W_.middleCols(st, k) + G_.middleCols(st, k) -
           state_.Delta.middleCols(st, k) * gram_.XtX.block(st, st, k, k);
  }

  /// Conditional of column i under none / s (lambda_i, pi) or sgs (nu_gi lambda_g, pi_1, pi_2).
  ColumnConditional column_conditional(int i) const {
    double lambda_eff, log_spike, log_slab_prior;
    const int g = groups_.group_of(i);
    switch (hyper_.variant) {
      case Variant::none:
      case Variant::s:
        lambda_eff = state_.lambda(i);
        log_spike = std::log(state_.pi);
        log_slab_prior = std::log1p(-state_.pi);
        break;
      case Variant::sgs: {
        lambda_eff = state_.nu(i) * state_.lambda(g);
        const bool rest_nonzero =
            group_active_[static_cast<std::size_t>(g)] - (state_.active[static_cast<std::size_t>(i)] ? 1 : 0) > 0;
        // With the rest of the group at zero, a non-zero Delta_gi also turns on the
        // kappa_g - 1 spike factors pi_2 of its siblings.
        log_spike = rest_nonzero ? std::log1p(-state_.pi) + std::log(state_.pi2)
                                 : std::log(state_.pi) - (groups_.size(g) > 1 ? (groups_.size(g) - 1) * std::log(state_.pi2) : 0.0);
        log_slab_prior = std::log1p(-state_.pi) + std::log1p(-state_.pi2);
        break;
      }
      default:
        throw InvalidParameter("column_conditional: not a column-wise variant");
    }
    ColumnConditional c;
    const Eigen::VectorXd h = h_column(i);
    const double x2 = gram_.col_sqnorm(i);
    c.s = lambda_eff / (1.0 + lambda_eff * x2);
    const Eigen::VectorXd z = chol_omega_.triangularView<Eigen::Lower>().solve(h);
    c.log_spike = log_spike;
    c.log_slab = log_slab_prior - 0.5 * static_cast<double>(gram_.q) * std::log1p(lambda_eff * x2) +
                 0.5 * c.s * z.squaredNorm();
    c.p_spike = spike_probability(c.log_spike, c.log_slab);
    c.mean = -slab_mean_sign_ * c.s * h;
    return c;
  }

  GroupConditional group_conditional(int g) const {
    if (hyper_.variant != Variant::gs) throw InvalidParameter("group_conditional: variant is not gs");
    const int st = groups_.start(g), k = groups_.size(g);
    GroupConditional c;
    c.lambda = state_.lambda(g);
    Eigen::MatrixXd P = c.lambda * gram_.XtX.block(st, st, k, k);
    P.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success) throw NumericalError("group conditional: I + lambda X^T X not SPD");
    c.chol_P = llt.matrixL();
    c.logdet_P = 2.0 * c.chol_P.diagonal().array().log().sum();
    const Eigen::MatrixXd h = h_group(g);
    // tr(H^T Omega^{-1} H S) = lambda ||L_P^{-1} (L_Omega^{-1} H)^T||_F^2
    const Eigen::MatrixXd r = chol_omega_.triangularView<Eigen::Lower>().solve(h);
    const Eigen::MatrixXd t = c.chol_P.triangularView<Eigen::Lower>().solve(r.transpose());
    c.log_spike = std::log(state_.pi);
    c.log_slab = std::log1p(-state_.pi) - 0.5 * static_cast<double>(gram_.q) * c.logdet_P +
                 0.5 * c.lambda * t.squaredNorm();
    c.p_spike = spike_probability(c.log_spike, c.log_slab);
    c.mean = -slab_mean_sign_ * c.lambda * llt.solve(h.transpose()).transpose();
    return c;
  }

  /// Column update for none / s (Delta_i) and sgs (Delta_gi).
  void update_delta_column(int i, Rng& rng) {
    const ColumnConditional c = column_conditional(i);
    const double u = rng.uniform();
    if (u < c.p_spike) {
      set_column(i, Eigen::VectorXd::Zero(gram_.q));
      return;
    }
    Eigen::VectorXd z(gram_.q);
    for (Eigen::Index r = 0; r < gram_.q; ++r) z(r) = rng.normal();
    Eigen::VectorXd draw = c.mean + std::sqrt(c.s) * (chol_omega_ * z);
    if (!draw.allFinite()) throw NumericalError("non-finite slab draw for Delta column");
    set_column(i, draw);
  }

  void update_delta_group(int g, Rng& rng) {
    const GroupConditional c = group_conditional(g);
    const int k = groups_.size(g);
    const double u = rng.uniform();
    if (u < c.p_spike) {
      set_block(g, Eigen::MatrixXd::Zero(gram_.q, k));
      return;
    }
    Eigen::MatrixXd z(gram_.q, k);
    for (int j = 0; j < k; ++j)
      for (Eigen::Index r = 0; r < gram_.q; ++r) z(r, j) = rng.normal();
    // Z F^T with F F^T = S, F = sqrt(lambda) L_P^{-T}.
    const Eigen::MatrixXd zf =
        std::sqrt(c.lambda) *
        c.chol_P.transpose().triangularView<Eigen::Upper>().solve(z.transpose()).transpose();
    Eigen::MatrixXd draw = c.mean + chol_omega_ * zf;
    if (!draw.allFinite()) throw NumericalError("non-finite slab draw for Delta group");
    set_block(g, draw);
  }

  void update_delta(Rng& rng) {
    refresh_delta_products();
    if (hyper_.variant == Variant::gs) {
      for (int g = 0; g < m(); ++g) update_delta_group(g, rng);
    } else {
      for (Eigen::Index i = 0; i < gram_.p; ++i) update_delta_column(static_cast<int>(i), rng);
    }
  }

  // ---- Omega ---------------------------------------------------------------

  /// Prior variance factor d_i of column i (lambda_i, lambda_g or nu_gi lambda_g).
  double slab_scale(int i) const {
    switch (hyper_.variant) {
      case Variant::none:
      case Variant::s: return state_.lambda(i);
      case Variant::gs: return state_.lambda(groups_.group_of(i));
      case Variant::sgs: return state_.nu(i) * state_.lambda(groups_.group_of(i));
    }
    return 1.0;
  }

  OmegaConditional omega_conditional() const {
    OmegaConditional c;
    const SparsityCounters cnt = counters();
    c.nu = 0.5 * (static_cast<double>(gram_.n) - static_cast<double>(gram_.p) + cnt.N0 + hyper_.u);
    c.A = Eigen::MatrixXd::Zero(gram_.q, gram_.q);
    for (Eigen::Index i = 0; i < gram_.p; ++i) {
      if (!state_.active[static_cast<std::size_t>(i)]) continue;
      const auto d = state_.Delta.col(i);
      c.A.noalias() += G_.col(i) * d.transpose();
      c.A.noalias() += (d * d.transpose()) / slab_scale(static_cast<int>(i));
    }
    c.A = (0.5 * (c.A + c.A.transpose())).eval();
    c.B = B_omega_;
    return c;
  }

  void update_omega(Rng& rng) {
    refresh_delta_products();
    const OmegaConditional c = omega_conditional();
    Eigen::MatrixXd omega;
    last_riccati_iterations_ = 0;
    if (gram_.q == 1) {
      const double a = c.A(0, 0), b = c.B(0, 0);
      const double w = a > 0.0 ? sample_gig(rng, GigParams{c.nu, a, b}) : sample_gamma(rng, c.nu, 0.5 * b);
      omega = Eigen::MatrixXd::Constant(1, 1, w);
    } else {
      RiccatiSolution sol = mgig_mode(MgigParams{c.nu, c.A, c.B}, riccati_, &state_.Omega);
      last_riccati_iterations_ = sol.iterations;
      omega = std::move(sol.mode);
    }
    if (!omega.allFinite()) throw NumericalError("non-finite Omega update");
    state_.Omega = std::move(omega);
    refresh_omega_products();
  }

  // ---- shrinkage -----------------------------------------------------------

  /// Delta_i^T Omega^{-1} Delta_i for every column.
  Eigen::VectorXd column_quadratic_forms() const {
    const Eigen::MatrixXd z = chol_omega_.triangularView<Eigen::Lower>().solve(state_.Delta);
    return z.colwise().squaredNorm().transpose();
  }

  /// GIG branch parameters (nu, a, b) of lambda index k when active, or Gamma (shape, rate) when not.
  struct ShrinkageConditional {
    bool active = false;
    GigParams gig;
    double shape = 0.0, rate = 0.0;
  };

  ShrinkageConditional lambda_conditional(int k, const Eigen::VectorXd& quad) const {
    ShrinkageConditional c;
    const Eigen::Index q = gram_.q;
    switch (hyper_.variant) {
      case Variant::none:
      case Variant::s:
        c.active = state_.active[static_cast<std::size_t>(k)];
        c.gig = GigParams{0.5, quad(k), 2.0 * hyper_.ell(k)};
        c.shape = alpha_sparse(q);
        c.rate = hyper_.ell(k);
        break;
      case Variant::gs: {
        const int st = groups_.start(k), sz = groups_.size(k);
        c.active = group_active_[static_cast<std::size_t>(k)] > 0;
        c.gig = GigParams{0.5, quad.segment(st, sz).sum(), 2.0 * hyper_.ell(k)};
        c.shape = alpha_group(q, sz);
        c.rate = hyper_.ell(k);
        break;
      }
      case Variant::sgs: {
        const int st = groups_.start(k), sz = groups_.size(k);
        const int zeros = sz - group_active_[static_cast<std::size_t>(k)];
        c.active = group_active_[static_cast<std::size_t>(k)] > 0;
        double a = 0.0;
        for (int j = st; j < st + sz; ++j)
          if (state_.active[static_cast<std::size_t>(j)]) a += quad(j) / state_.nu(j);
        c.gig = GigParams{0.5 * (static_cast<double>(q) * zeros + 1.0), a, 2.0 * hyper_.gamma(k)};
        c.shape = alpha_group(q, sz);
        c.rate = hyper_.gamma(k);
        break;
      }
    }
    return c;
  }

  ShrinkageConditional nu_conditional(int i, const Eigen::VectorXd& quad) const {
    if (hyper_.variant != Variant::sgs) throw InvalidParameter("nu is only used by sgs");
    ShrinkageConditional c;
    c.active = state_.active[static_cast<std::size_t>(i)];
    c.gig = GigParams{0.5, quad(i) / state_.lambda(groups_.group_of(i)), 2.0 * hyper_.ell(i)};
    c.shape = alpha_sparse(gram_.q);
    c.rate = hyper_.ell(i);
    return c;
  }

  static double draw_shrinkage(Rng& rng, const ShrinkageConditional& c) {
    return c.active ? sample_gig(rng, c.gig) : sample_gamma(rng, c.shape, c.rate);
  }

  void update_lambda(Rng& rng) {
    const Eigen::VectorXd quad = column_quadratic_forms();
    if (hyper_.variant == Variant::sgs) {
      if (hyper_.identifiability != IdentifiabilityMode::fix_nu)
        for (Eigen::Index i = 0; i < gram_.p; ++i)
          state_.nu(i) = draw_shrinkage(rng, nu_conditional(static_cast<int>(i), quad));
      if (hyper_.identifiability != IdentifiabilityMode::fix_lambda)
        for (int g = 0; g < m(); ++g) state_.lambda(g) = draw_shrinkage(rng, lambda_conditional(g, quad));
      return;
    }
    for (Eigen::Index k = 0; k < state_.lambda.size(); ++k)
      state_.lambda(k) = draw_shrinkage(rng, lambda_conditional(static_cast<int>(k), quad));
  }

  // ---- spike probabilities -------------------------------------------------

  /// Beta parameters of pi (or pi_1 for sgs).
  std::pair<double, double> pi_conditional() const {
    const SparsityCounters c = counters();
    switch (hyper_.variant) {
      case Variant::none:
      case Variant::s: return {c.N0 + hyper_.a, static_cast<double>(gram_.p - c.N0) + hyper_.b};
      case Variant::gs:
      case Variant::sgs: return {c.G0 + hyper_.a, static_cast<double>(m() - c.G0) + hyper_.b};
    }
    return {1.0, 1.0};
  }

  std::pair<double, double> pi2_conditional() const {
    const SparsityCounters c = counters();
    return {c.J0 + hyper_.a2, static_cast<double>(gram_.p - c.N0) + hyper_.b2};
  }

  void update_pi(Rng& rng) {
    if (!hyper_.fixed_pi) {
      const auto [a, b] = pi_conditional();
      state_.pi = sample_beta(rng, a, b);
    }
    if (hyper_.variant == Variant::sgs && !hyper_.fixed_pi2) {
      const auto [a, b] = pi2_conditional();
      state_.pi2 = sample_beta(rng, a, b);
    }
  }

  /// One Gibbs sweep: Delta, Omega, lambda (and nu), pi.
  void sweep(Rng& rng) {
    update_delta(rng);
    update_omega(rng);
    update_lambda(rng);
    update_pi(rng);
  }

  // ---- log-densities of the implemented conditionals ----------------------
  // Point masses at zero are densities with respect to counting measure, the
  // slabs with respect to Lebesgue measure.

  double log_conditional_delta_column(int i, const Eigen::VectorXd& x) const {
    const ColumnConditional c = column_conditional(i);
    const double lse = log_sum_exp(c.log_spike, c.log_slab);
    if ((x.array() == 0.0).all()) return c.log_spike - lse;
    const double q = static_cast<double>(gram_.q);
    const Eigen::VectorXd z = chol_omega_.triangularView<Eigen::Lower>().solve(x - c.mean);
    return c.log_slab - lse - 0.5 * q * std::log(2.0 * std::numbers::pi * c.s) - 0.5 * logdet_omega_ -
           0.5 * z.squaredNorm() / c.s;
  }

  double log_conditional_delta_group(int g, const Eigen::MatrixXd& x) const {
    const GroupConditional c = group_conditional(g);
    const double lse = log_sum_exp(c.log_spike, c.log_slab);
    if ((x.array() == 0.0).all()) return c.log_spike - lse;
    const double q = static_cast<double>(gram_.q);
    const double k = static_cast<double>(groups_.size(g));
    const double logdet_S = k * std::log(c.lambda) - c.logdet_P;
    const Eigen::MatrixXd r = chol_omega_.triangularView<Eigen::Lower>().solve(x - c.mean);
    // tr(S^{-1} R^T Omega^{-1} R) = ||L_P^T r^T||^2 / lambda
    const double quad = (c.chol_P.transpose() * r.transpose()).squaredNorm() / c.lambda;
    return c.log_slab - lse - 0.5 * q * k * std::log(2.0 * std::numbers::pi) - 0.5 * k * logdet_omega_ -
           0.5 * q * logdet_S - 0.5 * quad;
  }

  /// Unnormalized: exact GIG kernel for q = 1, MGIG kernel otherwise.
  double log_conditional_omega(const Eigen::MatrixXd& omega) const {
    const OmegaConditional c = omega_conditional();
    if (gram_.q == 1) return logpdf_gig(omega(0, 0), GigParams{c.nu, c.A(0, 0), c.B(0, 0)});
    return logpdf_mgig(omega, MgigParams{c.nu, c.A, c.B});
  }

  double log_conditional_lambda(int k, double x) const {
    const ShrinkageConditional c = lambda_conditional(k, column_quadratic_forms());
    return c.active ? logpdf_gig(x, c.gig) : logpdf_gamma(x, c.shape, c.rate);
  }

  double log_conditional_nu(int i, double x) const {
    const ShrinkageConditional c = nu_conditional(i, column_quadratic_forms());
    return c.active ? logpdf_gig(x, c.gig) : logpdf_gamma(x, c.shape, c.rate);
  }

  double log_conditional_pi(double x) const {
    const auto [a, b] = pi_conditional();
    return logpdf_beta(x, a, b);
  }

  double log_conditional_pi2(double x) const {
    const auto [a, b] = pi2_conditional();
    return logpdf_beta(x, a, b);
  }

  // ---- direct state edits (tests, oracle) ---------------------------------

  void set_column(int i, const Eigen::VectorXd& value) {
    const auto col = static_cast<std::size_t>(i);
    const Eigen::VectorXd diff = value - state_.Delta.col(i);
    const bool now_active = !(value.array() == 0.0).all();
    if (!(diff.array() == 0.0).all()) G_.noalias() += diff * gram_.XtX.row(i);
    state_.Delta.col(i) = value;
    if (now_active != static_cast<bool>(state_.active[col])) {
      group_active_[static_cast<std::size_t>(groups_.group_of(i))] += now_active ? 1 : -1;
      state_.active[col] = now_active;
    }
  }

  void set_block(int g, const Eigen::MatrixXd& value) {
    const int st = groups_.start(g), k = groups_.size(g);
    const Eigen::MatrixXd diff = value - state_.Delta.middleCols(st, k);
    G_.noalias() += diff * gram_.XtX.middleRows(st, k);
    state_.Delta.middleCols(st, k) = value;
    int count = 0;
    for (int j = 0; j < k; ++j) {
      const bool a = !(value.col(j).array() == 0.0).all();
      state_.active[static_cast<std::size_t>(st + j)] = a;
      count += a ? 1 : 0;
    }
    group_active_[static_cast<std::size_t>(g)] = count;
  }

  void set_omega(const Eigen::MatrixXd& omega) {
    state_.Omega = omega;
    refresh_omega_products();
  }

  void set_lambda(int k, double v) { state_.lambda(k) = v; }
  void set_nu(int i, double v) { state_.nu(i) = v; }
  void set_pi(double v) { state_.pi = v; }
  void set_pi2(double v) { state_.pi2 = v; }

 private:
  void refresh_delta_products() {
    G_ = Eigen::MatrixXd::Zero(gram_.q, gram_.p);
    for (Eigen::Index i = 0; i < gram_.p; ++i)
      if (state_.active[static_cast<std::size_t>(i)]) G_.noalias() += state_.Delta.col(i) * gram_.XtX.row(i);
  }

  void refresh_omega_products() {
    Eigen::LLT<Eigen::MatrixXd> llt(state_.Omega);
    if (llt.info() != Eigen::Success) throw NumericalError("Omega is not positive definite");
    chol_omega_ = llt.matrixL();
    logdet_omega_ = 2.0 * chol_omega_.diagonal().array().log().sum();
    W_.noalias() = state_.Omega * gram_.YtX;
  }

  GramCache gram_;
  GroupStructure groups_;
  Hyperparameters hyper_;
  RiccatiOptions riccati_;
  Eigen::MatrixXd B_omega_;

  ChainState state_;
  std::vector<int> group_active_;
  Eigen::MatrixXd G_;
  Eigen::MatrixXd W_;
  Eigen::MatrixXd chol_omega_;
  double logdet_omega_ = 0.0;
  int last_riccati_iterations_ = 0;
  double slab_mean_sign_ = 1.0;
};

}  // namespace pggm

#endif  // PGGM_CONDITIONALS_HPP
