#ifndef PGGM_MODEL_HPP
#define PGGM_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pggm/errors.hpp"

namespace pggm {

/// none: no spike (pi = 0); s: column-wise spike-and-slab; gs: group-wise;
/// sgs: bi-level (group and within-group) spike-and-slab.
enum class Variant { none, s, gs, sgs };
enum class ShrinkageMode { adaptative, global };
enum class IdentifiabilityMode { free, fix_lambda, fix_nu };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::none: return "none";
    case Variant::s: return "s";
    case Variant::gs: return "gs";
    case Variant::sgs: return "sgs";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "none") return Variant::none;
  if (s == "s") return Variant::s;
  if (s == "gs") return Variant::gs;
  if (s == "sgs") return Variant::sgs;
  throw InvalidParameter("unknown variant '" + s + "' (expected none, s, gs or sgs)");
}

inline std::string to_string(ShrinkageMode m) {
  return m == ShrinkageMode::adaptative ? "adaptative" : "global";
}

inline ShrinkageMode parse_shrinkage(const std::string& s) {
  if (s == "adaptative" || s == "adaptive" || s == "ad") return ShrinkageMode::adaptative;
  if (s == "global" || s == "gl") return ShrinkageMode::global;
  throw InvalidParameter("unknown shrinkage mode '" + s + "' (expected adaptative or global)");
}

inline std::string to_string(IdentifiabilityMode m) {
  switch (m) {
    case IdentifiabilityMode::free: return "free";
    case IdentifiabilityMode::fix_lambda: return "fix-lambda";
    case IdentifiabilityMode::fix_nu: return "fix-nu";
  }
  return "?";
}

inline IdentifiabilityMode parse_identifiability(const std::string& s) {
  if (s == "free") return IdentifiabilityMode::free;
  if (s == "fix-lambda") return IdentifiabilityMode::fix_lambda;
  if (s == "fix-nu") return IdentifiabilityMode::fix_nu;
  throw InvalidParameter("unknown identifiability mode '" + s +
                         "' (expected free, fix-lambda or fix-nu)");
}

struct Dataset {
  Eigen::MatrixXd X;  // n x p
  Eigen::MatrixXd Y;  // n x q

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
  Eigen::Index q() const { return Y.cols(); }

  void validate() const {
    if (X.rows() != Y.rows()) {
      std::ostringstream msg;
      msg << "X has " << X.rows() << " rows but Y has " << Y.rows();
      throw DimensionMismatch(msg.str());
    }
    if (n() < 1 || p() < 1 || q() < 1)
      throw DimensionMismatch("dataset needs n >= 1, p >= 1 and q >= 1");
    if (!X.allFinite() || !Y.allFinite()) throw DataError("dataset contains non-finite entries");
  }
};

/// Partition of the p predictor columns into contiguous groups.
class GroupStructure {
 public:
  GroupStructure() = default;
  explicit GroupStructure(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw InvalidParameter("group structure needs at least one group");
    starts_.resize(sizes_.size());
    int start = 0;
    for (std::size_t g = 0; g < sizes_.size(); ++g) {
      if (sizes_[g] < 1) throw InvalidParameter("group sizes must be positive");
      starts_[g] = start;
      start += sizes_[g];
    }
    group_of_.resize(static_cast<std::size_t>(start));
    for (std::size_t g = 0; g < sizes_.size(); ++g)
      for (int k = 0; k < sizes_[g]; ++k) group_of_[static_cast<std::size_t>(starts_[g] + k)] = static_cast<int>(g);
  }

  static GroupStructure singletons(int p) { return GroupStructure(std::vector<int>(static_cast<std::size_t>(p), 1)); }
  static GroupStructure single(int p) { return GroupStructure(std::vector<int>{p}); }

  int m() const { return static_cast<int>(sizes_.size()); }
  int p() const { return static_cast<int>(group_of_.size()); }
  int size(int g) const { return sizes_[static_cast<std::size_t>(g)]; }
  int start(int g) const { return starts_[static_cast<std::size_t>(g)]; }
  int group_of(int column) const { return group_of_[static_cast<std::size_t>(column)]; }
  const std::vector<int>& sizes() const { return sizes_; }

  void check_columns(Eigen::Index p_cols) const {
    if (p() != p_cols) {
      std::ostringstream msg;
      msg << "group sizes sum to " << p() << " but there are " << p_cols << " predictors";
      throw DimensionMismatch(msg.str());
    }
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> starts_;
  std::vector<int> group_of_;
};

inline double alpha_sparse(Eigen::Index q) { return 0.5 * (static_cast<double>(q) + 1.0); }
inline double alpha_group(Eigen::Index q, int kappa) {
  return 0.5 * (static_cast<double>(q) * kappa + 1.0);
}

struct Hyperparameters {
  Variant variant = Variant::s;
  // Shrinkage rates: length p for none/s (ell_i) and sgs (ell_gi), length m for gs (ell_g).
  Eigen::VectorXd ell;
  // Group-level rates gamma_g (sgs only), length m.
  Eigen::VectorXd gamma;
  double u = 1.0;
  Eigen::MatrixXd V;
  // Beta prior of pi (s, gs) or pi_1 (sgs).
  double a = 1.0, b = 1.0;
  // Beta prior of pi_2 (sgs).
  double a2 = 1.0, b2 = 1.0;
  ShrinkageMode shrinkage = ShrinkageMode::adaptative;
  IdentifiabilityMode identifiability = IdentifiabilityMode::free;
  // When set, the spike probability is held at this value instead of being sampled.
  std::optional<double> fixed_pi;
  std::optional<double> fixed_pi2;

  /// Number of shrinkage rates ell for the variant.
  static Eigen::Index ell_length(Variant v, Eigen::Index p, int m) {
    return v == Variant::gs ? m : p;
  }

  /// u = q, V = I/q, ell set so that the prior mean of every lambda equals
  /// `lambda0`, gamma likewise for sgs; a = b = 1.
  static Hyperparameters defaults(Variant v, Eigen::Index q, const GroupStructure& groups,
                                  double lambda0 = 0.5) {
    Hyperparameters h;
    h.variant = v;
    const Eigen::Index p = groups.p();
    const int m = groups.m();
    h.u = static_cast<double>(q);
    h.V = Eigen::MatrixXd::Identity(q, q) / h.u;
    if (v == Variant::gs) {
      h.ell.resize(m);
      for (int g = 0; g < m; ++g) h.ell(g) = alpha_group(q, groups.size(g)) / lambda0;
    } else {
      h.ell = Eigen::VectorXd::Constant(p, alpha_sparse(q) / lambda0);
    }
    if (v == Variant::sgs) {
      h.gamma.resize(m);
      for (int g = 0; g < m; ++g) h.gamma(g) = alpha_group(q, groups.size(g)) / 1.0;
    }
    if (v == Variant::none) h.fixed_pi = 0.0;
    return h;
  }

  void validate(Eigen::Index q, const GroupStructure& groups) const {
    const Eigen::Index p = groups.p();
    const int m = groups.m();
    if (ell.size() != ell_length(variant, p, m)) {
      std::ostringstream msg;
      msg << "expected " << ell_length(variant, p, m) << " shrinkage rates ell, got " << ell.size();
      throw DimensionMismatch(msg.str());
    }
    if (!(ell.array() > 0.0).all() || !ell.allFinite())
      throw InvalidParameter("shrinkage rates ell must be positive");
    if (variant == Variant::sgs) {
      if (gamma.size() != m) throw DimensionMismatch("expected one gamma per group");
      if (!(gamma.array() > 0.0).all() || !gamma.allFinite())
        throw InvalidParameter("group rates gamma must be positive");
    }
    if (!(u > static_cast<double>(q) - 1.0)) throw InvalidParameter("Wishart dof u must exceed q - 1");
    if (V.rows() != q || V.cols() != q) throw DimensionMismatch("V must be q x q");
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    if (llt.info() != Eigen::Success || !V.isApprox(V.transpose(), 1e-12))
      throw InvalidParameter("V must be symmetric positive definite");
    if (!(a > 0.0) || !(b > 0.0) || !(a2 > 0.0) || !(b2 > 0.0))
      throw InvalidParameter("Beta prior constants must be positive");
    for (const auto& f : {fixed_pi, fixed_pi2})
      if (f && !(*f >= 0.0 && *f <= 1.0)) throw InvalidParameter("fixed spike probability outside [0, 1]");
  }
};

struct ChainState {
  Eigen::MatrixXd Delta;       // q x p, zero columns are exact zeros
  std::vector<char> active;    // per column: 1 if Delta column is non-zero
  Eigen::MatrixXd Omega;       // q x q SPD
  Eigen::VectorXd lambda;      // p (none, s), m (gs, sgs)
  Eigen::VectorXd nu;          // p (sgs), empty otherwise
  double pi = 0.0;             // pi (none, s, gs) or pi_1 (sgs)
  double pi2 = 0.0;            // pi_2 (sgs)

  void validate() const {
    if (Delta.cols() != static_cast<Eigen::Index>(active.size()))
      throw DimensionMismatch("state: activity mask does not match Delta");
    if (!Delta.allFinite() || !Omega.allFinite() || !lambda.allFinite() || !nu.allFinite())
      throw NumericalError("state: non-finite value");
    for (Eigen::Index i = 0; i < Delta.cols(); ++i) {
      const bool zero = (Delta.col(i).array() == 0.0).all();
      if (zero == static_cast<bool>(active[static_cast<std::size_t>(i)]))
        throw NumericalError("state: activity mask inconsistent with Delta");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(Omega);
    if (llt.info() != Eigen::Success) throw NumericalError("state: Omega is not positive definite");
    if (!(lambda.array() > 0.0).all() || (nu.size() > 0 && !(nu.array() > 0.0).all()))
      throw NumericalError("state: shrinkage factors must be positive");
    if (!(pi >= 0.0 && pi <= 1.0) || !(pi2 >= 0.0 && pi2 <= 1.0))
      throw NumericalError("state: spike probability outside [0, 1]");
  }
};

struct SparsityCounters {
  int N0 = 0;              // zero columns
  int G0 = 0;              // zero groups
  std::vector<int> N0g;    // zero columns per group
  int J0 = 0;              // zero columns inside non-zero groups

  bool operator==(const SparsityCounters&) const = default;
};

inline SparsityCounters count_sparsity(const std::vector<char>& active, const GroupStructure& groups) {
  groups.check_columns(static_cast<Eigen::Index>(active.size()));
  SparsityCounters c;
  c.N0g.assign(static_cast<std::size_t>(groups.m()), 0);
  for (int g = 0; g < groups.m(); ++g) {
    int zeros = 0;
    for (int k = 0; k < groups.size(g); ++k)
      if (!active[static_cast<std::size_t>(groups.start(g) + k)]) ++zeros;
    c.N0g[static_cast<std::size_t>(g)] = zeros;
    c.N0 += zeros;
    if (zeros == groups.size(g))
      ++c.G0;
    else
      c.J0 += zeros;
  }
  return c;
}

/// Counts from exact-zero column tests on Delta.
inline SparsityCounters count_sparsity(const Eigen::MatrixXd& Delta, const GroupStructure& groups) {
  groups.check_columns(Delta.cols());
  std::vector<char> active(static_cast<std::size_t>(Delta.cols()));
  for (Eigen::Index i = 0; i < Delta.cols(); ++i)
    active[static_cast<std::size_t>(i)] = !(Delta.col(i).array() == 0.0).all();
  return count_sparsity(active, groups);
}

/// B = -Delta^T Omega^{-1} (p x q).
inline Eigen::MatrixXd reparam_B(const Eigen::MatrixXd& Delta, const Eigen::MatrixXd& Omega) {
  if (Omega.rows() != Omega.cols() || Omega.rows() != Delta.rows())
    throw DimensionMismatch("reparam_B: Omega must be q x q with q = rows of Delta");
  Eigen::LLT<Eigen::MatrixXd> llt(Omega);
  if (llt.info() != Eigen::Success) throw NumericalError("reparam_B: Omega is not positive definite");
  return -llt.solve(Delta).transpose();
}

struct Scaling {
  Eigen::VectorXd x_mean, x_scale;
  Eigen::VectorXd y_mean, y_scale;
  std::vector<int> constant_x;  // indices of zero-variance predictor columns
  std::vector<int> constant_y;

  /// Raw-scale coefficients from coefficients fitted on standardized data.
  Eigen::MatrixXd destandardize_B(const Eigen::MatrixXd& B_std) const {
    return x_scale.cwiseInverse().asDiagonal() * B_std * y_scale.asDiagonal();
  }

  /// Raw-scale predictions y_mean + (X - x_mean) B_raw.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& X_raw, const Eigen::MatrixXd& B_raw) const {
    Eigen::MatrixXd centered = X_raw.rowwise() - x_mean.transpose();
    return (centered * B_raw).rowwise() + y_mean.transpose();
  }
};

struct StandardizedData {
  Dataset data;
  Scaling scaling;
};

namespace detail {

inline void standardize_columns(Eigen::MatrixXd& m, Eigen::VectorXd& mean, Eigen::VectorXd& scale,
                                std::vector<int>& constant) {
  const double n = static_cast<double>(m.rows());
  mean = m.colwise().mean().transpose();
  m.rowwise() -= mean.transpose();
  scale.resize(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double var = m.col(j).squaredNorm() / (n - 1.0);
    if (!(var > 0.0)) {
      constant.push_back(static_cast<int>(j));
      scale(j) = 1.0;
      m.col(j).setZero();
    } else {
      scale(j) = std::sqrt(var);
      m.col(j) /= scale(j);
    }
  }
}

}  // namespace detail

/// Centers every column and scales it to unit sample variance. Constant
/// columns are centered only and reported in the scaling record.
inline StandardizedData standardize(const Dataset& data) {
  data.validate();
  if (data.n() < 2) throw DataError("standardize needs at least two observations");
  StandardizedData out;
  out.data = data;
  detail::standardize_columns(out.data.X, out.scaling.x_mean, out.scaling.x_scale,
                              out.scaling.constant_x);
  detail::standardize_columns(out.data.Y, out.scaling.y_mean, out.scaling.y_scale,
                              out.scaling.constant_y);
  return out;
}

}  // namespace pggm

#endif  // PGGM_MODEL_HPP
