#ifndef PGGM_GIBBS_HPP
#define PGGM_GIBBS_HPP

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pggm/conditionals.hpp"
#include "pggm/errors.hpp"
#include "pggm/model.hpp"
#include "pggm/random.hpp"
#include "pggm/tuning.hpp"

namespace pggm {

struct GibbsConfig {
  int iterations = 3000;
  int burn_in = 2000;
  int thin = 1;
  std::uint64_t seed = 1;
  EmSchedule em;
  RiccatiOptions riccati;
  int invariant_check_period = 100;  // 0 disables

  void validate() const {
    if (iterations < 1) throw InvalidParameter("iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations) throw InvalidParameter("burn_in must lie in [0, iterations)");
    if (thin < 1) throw InvalidParameter("thin must be >= 1");
    em.validate();
  }

  int retained_draws() const { return (iterations - burn_in) / thin; }
};

/// Non-zero columns of one Delta draw.
struct SparseDeltaDraw {
  std::vector<int> columns;
  Eigen::MatrixXd values;  // q x columns.size()

  static SparseDeltaDraw from_dense(const Eigen::MatrixXd& delta, const std::vector<char>& active) {
    SparseDeltaDraw d;
    for (std::size_t i = 0; i < active.size(); ++i)
      if (active[i]) d.columns.push_back(static_cast<int>(i));
    d.values.resize(delta.rows(), static_cast<Eigen::Index>(d.columns.size()));
    for (std::size_t k = 0; k < d.columns.size(); ++k)
      d.values.col(static_cast<Eigen::Index>(k)) = delta.col(d.columns[k]);
    return d;
  }

  Eigen::MatrixXd to_dense(Eigen::Index q, Eigen::Index p) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q, p);
    for (std::size_t k = 0; k < columns.size(); ++k) out.col(columns[k]) = values.col(static_cast<Eigen::Index>(k));
    return out;
  }
};

struct EmRecord {
  int sweep = 0;
  Eigen::VectorXd ell;
  Eigen::VectorXd gamma;
};

struct ChainOutput {
  Variant variant = Variant::s;
  Eigen::Index q = 0, p = 0;
  GroupStructure groups;

  // Retained draws.
  std::vector<int> draw_sweeps;
  std::vector<SparseDeltaDraw> delta;
  std::vector<Eigen::MatrixXd> omega;
  std::vector<Eigen::VectorXd> lambda;
  std::vector<Eigen::VectorXd> nu;
  std::vector<double> pi;
  std::vector<double> pi2;

  // One entry per completed sweep.
  std::vector<int> n0, g0, j0;
  std::vector<int> riccati_iterations;

  std::vector<EmRecord> em_trace;
  Hyperparameters final_hyper;
  ChainState final_state;
  bool omega_mode_propagated = false;  // Omega updates are MGIG modes (q > 1)
  int completed_sweeps = 0;
  std::optional<std::string> error;    // set when the chain aborted
  int error_sweep = 0;

  std::size_t draw_count() const { return delta.size(); }
};

/// Runs one chain from the default initial state (or `init`), consuming `rng`.
inline ChainOutput run_chain(const Dataset& data, const GroupStructure& groups,
                             const Hyperparameters& hyper, const GibbsConfig& config, Rng& rng,
                             const ChainState* init = nullptr) {
  config.validate();
  Sampler sampler(data, groups, hyper, config.riccati);
  if (init != nullptr) sampler.set_state(*init);

  ChainOutput out;
  out.variant = hyper.variant;
  out.q = data.q();
  out.p = data.p();
  out.groups = groups;
  out.omega_mode_propagated = data.q() > 1;
  const int retained = config.retained_draws();
  out.delta.reserve(static_cast<std::size_t>(retained));
  out.n0.reserve(static_cast<std::size_t>(config.iterations));

  const bool sgs = hyper.variant == Variant::sgs;
  const bool tune_ell = !sgs || hyper.identifiability != IdentifiabilityMode::fix_nu;
  const bool tune_gamma = sgs && hyper.identifiability != IdentifiabilityMode::fix_lambda;
  EmAccumulator ell_window, gamma_window;
  int em_updates = 0;

  for (int t = 1; t <= config.iterations; ++t) {
    try {
      sampler.sweep(rng);
      if (config.invariant_check_period > 0 && t % config.invariant_check_period == 0)
        sampler.check_invariants();
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "sweep " << t << ": " << e.what();
      out.error = msg.str();
      out.error_sweep = t;
      break;
    }
    const ChainState& st = sampler.state();
    const SparsityCounters c = sampler.counters();
    out.n0.push_back(c.N0);
    out.g0.push_back(c.G0);
    out.j0.push_back(c.J0);
    out.riccati_iterations.push_back(sampler.last_riccati_iterations());
    out.completed_sweeps = t;

    if (config.em.enabled && t <= config.burn_in &&
        (config.em.max_updates < 0 || em_updates < config.em.max_updates)) {
      if (tune_ell) ell_window.add(sgs ? st.nu : st.lambda);
      if (tune_gamma) gamma_window.add(st.lambda);
      if (t % config.em.period == 0) {
        const Hyperparameters& h = sampler.hyper();
        Eigen::VectorXd ell = h.ell, gamma = h.gamma;
        if (tune_ell)
          ell = em_update_rates(ell_window.means(), ell_shapes(hyper.variant, data.q(), groups),
                                h.shrinkage, config.em.min_rate, config.em.max_rate);
        if (tune_gamma)
          gamma = em_update_rates(gamma_window.means(), gamma_shapes(data.q(), groups), h.shrinkage,
                                  config.em.min_rate, config.em.max_rate);
        sampler.set_rates(ell, gamma);
        out.em_trace.push_back(EmRecord{t, ell, gamma});
        ell_window.reset();
        gamma_window.reset();
        ++em_updates;
      }
    }

    if (t > config.burn_in && (t - config.burn_in) % config.thin == 0) {
      out.draw_sweeps.push_back(t);
      out.delta.push_back(SparseDeltaDraw::from_dense(st.Delta, st.active));
      out.omega.push_back(st.Omega);
      out.lambda.push_back(st.lambda);
      if (sgs) out.nu.push_back(st.nu);
      out.pi.push_back(st.pi);
      if (sgs) out.pi2.push_back(st.pi2);
    }
  }
  out.final_hyper = sampler.hyper();
  out.final_state = sampler.state();
  return out;
}

/// Convenience overload seeding the chain from `config.seed`.
inline ChainOutput run_chain(const Dataset& data, const GroupStructure& groups,
                             const Hyperparameters& hyper, const GibbsConfig& config) {
  Rng rng(config.seed);
  return run_chain(data, groups, hyper, config, rng);
}

}  // namespace pggm

#endif  // PGGM_GIBBS_HPP
