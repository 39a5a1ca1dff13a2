#ifndef PGGM_TUNING_HPP
#define PGGM_TUNING_HPP

// Monte-Carlo EM for the shrinkage rates. For a Gamma(shape_k, ell_k) prior on
// lambda_k the M-step is ell_k = shape_k / E[lambda_k | data] (adaptative) or
// ell = sum_k shape_k / sum_k E[lambda_k | data] (global); the expectations
// are replaced by means over a window of Gibbs draws.

#include <algorithm>
#include <vector>

#include <Eigen/Core>

#include "pggm/errors.hpp"
#include "pggm/model.hpp"

namespace pggm {

struct EmSchedule {
  bool enabled = true;
  int period = 100;       // sweeps between updates (burn-in only)
  int max_updates = -1;   // < 0: unlimited
  double min_rate = 1e-8;
  double max_rate = 1e8;

  void validate() const {
    if (period < 1) throw InvalidParameter("EM period must be >= 1");
    if (!(min_rate > 0.0) || !(max_rate >= min_rate)) throw InvalidParameter("invalid EM rate bounds");
  }
};

/// Running per-coordinate sums of the draws since the last update.
class EmAccumulator {
 public:
  void add(const Eigen::VectorXd& draw) {
    if (count_ == 0) sums_ = Eigen::VectorXd::Zero(draw.size());
    if (draw.size() != sums_.size()) throw DimensionMismatch("EM window: draw length changed");
    sums_ += draw;
    ++count_;
  }
  int count() const { return count_; }
  Eigen::VectorXd means() const {
    if (count_ == 0) throw InvalidParameter("EM window is empty");
    return sums_ / static_cast<double>(count_);
  }
  void reset() {
    count_ = 0;
    sums_.resize(0);
  }

 private:
  Eigen::VectorXd sums_;
  int count_ = 0;
};

/// M-step from window means of the shrinkage draws.
inline Eigen::VectorXd em_update_rates(const Eigen::VectorXd& means, const Eigen::VectorXd& shapes,
                                       ShrinkageMode mode, double min_rate = 1e-8,
                                       double max_rate = 1e8) {
  if (means.size() == 0) throw InvalidParameter("EM window is empty");
  if (means.size() != shapes.size()) throw DimensionMismatch("EM: one shape per rate expected");
  if (!(means.array() > 0.0).all() || !means.allFinite())
    throw InvalidParameter("EM: draws must be positive and finite");
  auto clamp = [&](double v) { return std::clamp(v, min_rate, max_rate); };
  Eigen::VectorXd out(means.size());
  if (mode == ShrinkageMode::global) {
    out.setConstant(clamp(shapes.sum() / means.sum()));
  } else {
    for (Eigen::Index k = 0; k < means.size(); ++k) out(k) = clamp(shapes(k) / means(k));
  }
  return out;
}

inline Eigen::VectorXd window_means(const std::vector<Eigen::VectorXd>& draws) {
  if (draws.empty()) throw InvalidParameter("EM window is empty");
  EmAccumulator acc;
  for (const auto& d : draws) acc.add(d);
  return acc.means();
}

/// Gamma shapes of the rates ell: (q+1)/2 per column, (q kappa_g + 1)/2 per group for gs.
inline Eigen::VectorXd ell_shapes(Variant v, Eigen::Index q, const GroupStructure& groups) {
  if (v == Variant::gs) {
    Eigen::VectorXd s(groups.m());
    for (int g = 0; g < groups.m(); ++g) s(g) = alpha_group(q, groups.size(g));
    return s;
  }
  return Eigen::VectorXd::Constant(groups.p(), alpha_sparse(q));
}

inline Eigen::VectorXd gamma_shapes(Eigen::Index q, const GroupStructure& groups) {
  Eigen::VectorXd s(groups.m());
  for (int g = 0; g < groups.m(); ++g) s(g) = alpha_group(q, groups.size(g));
  return s;
}

/// ell from a window of lambda draws (none, s, gs) or nu draws (sgs).
inline Eigen::VectorXd em_update_ell(const std::vector<Eigen::VectorXd>& draws, ShrinkageMode mode,
                                     Eigen::Index q, Variant v, const GroupStructure& groups) {
  return em_update_rates(window_means(draws), ell_shapes(v, q, groups), mode);
}

/// gamma (sgs) from a window of group-level lambda draws.
inline Eigen::VectorXd em_update_gamma(const std::vector<Eigen::VectorXd>& draws, ShrinkageMode mode,
                                       Eigen::Index q, const GroupStructure& groups) {
  return em_update_rates(window_means(draws), gamma_shapes(q, groups), mode);
}

}  // namespace pggm

#endif  // PGGM_TUNING_HPP
