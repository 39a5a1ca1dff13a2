#ifndef PGGM_SCENARIOS_HPP
#define PGGM_SCENARIOS_HPP

// Synthetic benchmark scenarios. Responses follow Y_k = B^T X_k + E_k with
// B = -Delta^T Omega^{-1} and E_k ~ N(0, Omega^{-1}); predictors are
// N(0, C_p(rho_x)) with C_d = (rho^{|i-j|}).
//
//   id  q  p     groups                 non-zero part                     variant
//   0   1  5     -                      all of Delta ~ N(0, 2 w)          none
//   1   1  50    -                      10 random entries ~ N(0, w)       s
//   2   2  80    -                      10 random columns ~ N_2(0, Omega) s
//   3   1  320   100,10,100,10,100      groups 2, 4 ~ N(0, .5 w), N(0, w) gs
//   4   3  500   25 x 20                3 random groups ~ .5, 1, 1.5 Omega gs
//   5   1  150   3 x 50                 10 random entries of group 2      sgs
//   6   5  1000  20 x 50                first half of a random group      sgs
//
// Reduced versions: 4r (p = 100, 5 groups of 20) and 6r (p = 200, 4 groups of 50).

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

#include "pggm/errors.hpp"
#include "pggm/model.hpp"
#include "pggm/random.hpp"

namespace pggm {

struct ScenarioSpec {
  int id = 1;
  bool reduced = false;  // 4r / 6r
  int n_e = 400;
  int n_v = 100;
  double rho_x = 0.0;

  std::string name() const { return std::to_string(id) + (reduced ? "r" : ""); }

  void validate() const {
    if (id < 0 || id > 6) throw InvalidParameter("scenario id must lie in 0..6");
    if (reduced && id != 4 && id != 6) throw InvalidParameter("only scenarios 4 and 6 have reduced versions");
    if (n_e < 1) throw InvalidParameter("n_e must be >= 1");
    if (n_v < 1) throw InvalidParameter("n_v must be >= 1");
    if (!(rho_x >= 0.0 && rho_x < 1.0)) throw InvalidParameter("rho_x must lie in [0, 1)");
  }
};

inline ScenarioSpec parse_scenario(const std::string& s) {
  ScenarioSpec spec;
  std::string body = s;
  if (!body.empty() && (body.back() == 'r' || body.back() == '\'')) {
    spec.reduced = true;
    body.pop_back();
  }
  if (body.size() != 1 || body[0] < '0' || body[0] > '6')
    throw InvalidParameter("unknown scenario '" + s + "' (expected 0..6, 4r or 6r)");
  spec.id = body[0] - '0';
  spec.validate();
  return spec;
}

struct GroundTruth {
  Eigen::MatrixXd Delta;  // q x p
  Eigen::MatrixXd Omega;  // q x q
  Eigen::MatrixXd B;      // p x q
  std::vector<char> support;
  std::vector<int> active_groups;
};

struct ScenarioData {
  ScenarioSpec spec;
  Dataset train;
  Dataset test;
  GroundTruth truth;
  GroupStructure groups;
  Hyperparameters hyper;  // recommended prior constants

  /// tr(Omega^{-1}) / q, the expected MSPE of the true coefficients.
  double noise_floor() const {
    const Eigen::Index q = truth.Omega.rows();
    return truth.Omega.llt().solve(Eigen::MatrixXd::Identity(q, q)).trace() / static_cast<double>(q);
  }
};

/// C_d = (rho^{|i-j|}).
inline Eigen::MatrixXd ar1_matrix(Eigen::Index d, double rho) {
  if (d < 1) throw InvalidParameter("ar1_matrix: dimension must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidParameter("ar1_matrix: rho must lie in [0, 1)");
  Eigen::MatrixXd c(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) c(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  return c;
}

namespace detail {

// k distinct indices from [0, n), in increasing order (partial Fisher-Yates).
inline std::vector<int> choose_indices(Rng& rng, int n, int k) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int j = 0; j < k; ++j) {
    const auto r = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - j)));
    std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(j + r)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Rows N(0, C_p(rho)) through the AR(1) recursion.
inline Eigen::MatrixXd ar1_rows(Rng& rng, Eigen::Index n, Eigen::Index p, double rho) {
  Eigen::MatrixXd x(n, p);
  const double innov = std::sqrt(1.0 - rho * rho);
  for (Eigen::Index k = 0; k < n; ++k) {
    double prev = rng.normal();
    x(k, 0) = prev;
    for (Eigen::Index j = 1; j < p; ++j) {
      prev = rho * prev + innov * rng.normal();
      x(k, j) = prev;
    }
  }
  return x;
}

inline void fill_column(Rng& rng, Eigen::MatrixXd& delta, Eigen::Index i, const Eigen::MatrixXd& chol,
                        double variance_scale) {
  Eigen::VectorXd z(delta.rows());
  for (Eigen::Index r = 0; r < delta.rows(); ++r) z(r) = rng.normal();
  delta.col(i) = std::sqrt(variance_scale) * (chol * z);
}

}  // namespace detail

/// Draws ground truth, then n_e + n_v observations; the first n_e rows are the
/// training set.
inline ScenarioData generate(const ScenarioSpec& spec, Rng& rng) {
  spec.validate();
  ScenarioData out;
  out.spec = spec;
  int q = 1, p = 0;
  std::vector<int> sizes;
  double omega_scale = 1.0;
  switch (spec.id) {
    case 0: q = 1; p = 5; break;
    case 1: q = 1; p = 50; break;
    case 2: q = 2; p = 80; omega_scale = 2.0; break;
    case 3: q = 1; p = 320; sizes = {100, 10, 100, 10, 100}; break;
    case 4:
      q = 3;
      p = spec.reduced ? 100 : 500;
      sizes.assign(static_cast<std::size_t>(p / 20), 20);
      omega_scale = 3.0;
      break;
    case 5: q = 1; p = 150; sizes = {50, 50, 50}; break;
    case 6:
      q = 5;
      p = spec.reduced ? 200 : 1000;
      sizes.assign(static_cast<std::size_t>(p / 50), 50);
      omega_scale = 5.0;
      break;
  }
  out.groups = sizes.empty() ? GroupStructure::singletons(p) : GroupStructure(sizes);

  GroundTruth& t = out.truth;
  t.Omega = q == 1 ? Eigen::MatrixXd::Identity(1, 1)
                   : Eigen::MatrixXd(omega_scale * ar1_matrix(q, 0.5).inverse());
  t.Omega = (0.5 * (t.Omega + t.Omega.transpose())).eval();
  const Eigen::MatrixXd chol_omega = t.Omega.llt().matrixL();
  t.Delta = Eigen::MatrixXd::Zero(q, p);

  const GroupStructure& gr = out.groups;
  switch (spec.id) {
    case 0:
      for (int i = 0; i < p; ++i) detail::fill_column(rng, t.Delta, i, chol_omega, 2.0);
      break;
    case 1:
    case 2:
      for (int i : detail::choose_indices(rng, p, 10)) detail::fill_column(rng, t.Delta, i, chol_omega, 1.0);
      break;
    case 3: {
      t.active_groups = {1, 3};
      const double scales[] = {0.5, 1.0};
      for (int k = 0; k < 2; ++k) {
        const int g = t.active_groups[static_cast<std::size_t>(k)];
        for (int j = 0; j < gr.size(g); ++j) detail::fill_column(rng, t.Delta, gr.start(g) + j, chol_omega, scales[k]);
      }
      break;
    }
    case 4: {
      // Chosen groups keep their draw order so that the k-th gets scale 0.5 (k + 1).
      std::vector<int> all(static_cast<std::size_t>(gr.m()));
      std::iota(all.begin(), all.end(), 0);
      std::vector<int> chosen;
      for (int j = 0; j < 3; ++j) {
        const auto r = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(gr.m() - j)));
        std::swap(all[static_cast<std::size_t>(j)], all[static_cast<std::size_t>(j + r)]);
        chosen.push_back(all[static_cast<std::size_t>(j)]);
      }
      for (int k = 0; k < 3; ++k) {
        const int g = chosen[static_cast<std::size_t>(k)];
        for (int j = 0; j < gr.size(g); ++j)
          detail::fill_column(rng, t.Delta, gr.start(g) + j, chol_omega, 0.5 * (k + 1));
      }
      t.active_groups = chosen;
      std::sort(t.active_groups.begin(), t.active_groups.end());
      break;
    }
    case 5: {
      t.active_groups = {1};
      for (int j : detail::choose_indices(rng, gr.size(1), 10))
        detail::fill_column(rng, t.Delta, gr.start(1) + j, chol_omega, 1.0);
      break;
    }
    case 6: {
      const int g = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(gr.m())));
      t.active_groups = {g};
      const int half = (gr.size(g) + 1) / 2;
      for (int j = 0; j < half; ++j) detail::fill_column(rng, t.Delta, gr.start(g) + j, chol_omega, 1.0);
      break;
    }
  }
  t.support.assign(static_cast<std::size_t>(p), 0);
  for (int i = 0; i < p; ++i) t.support[static_cast<std::size_t>(i)] = !(t.Delta.col(i).array() == 0.0).all();
  t.B = reparam_B(t.Delta, t.Omega);

  const Eigen::Index n = spec.n_e + spec.n_v;
  const Eigen::MatrixXd X = detail::ar1_rows(rng, n, p, spec.rho_x);
  const Eigen::MatrixXd cov = t.Omega.llt().solve(Eigen::MatrixXd::Identity(q, q));
  const Eigen::MatrixXd chol_cov = Eigen::MatrixXd(0.5 * (cov + cov.transpose())).llt().matrixL();
  Eigen::MatrixXd E(n, q);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd z(q);
    for (int r = 0; r < q; ++r) z(r) = rng.normal();
    E.row(k) = (chol_cov * z).transpose();
  }
  const Eigen::MatrixXd Y = X * t.B + E;
  out.train = Dataset{X.topRows(spec.n_e), Y.topRows(spec.n_e)};
  out.test = Dataset{X.bottomRows(spec.n_v), Y.bottomRows(spec.n_v)};

  const Variant v = spec.id == 0 ? Variant::none
                    : spec.id <= 2 ? Variant::s
                    : spec.id <= 4 ? Variant::gs
                                   : Variant::sgs;
  Hyperparameters h = Hyperparameters::defaults(v, q, gr);
  const int m = gr.m();
  switch (spec.id) {
    case 1: h.a = p / 2.0; h.b = 1.0; break;
    case 2: h.a = p; h.b = 1.0; break;
    case 3:
    case 4: h.a = m; h.b = 1.0; break;
    case 5: h.a = m; h.b = 1.0; h.a2 = p / 3.0; h.b2 = 1.0; break;
    case 6: h.a = m; h.b = 1.0; h.a2 = p / 20.0; h.b2 = 1.0; break;
    default: break;
  }
  out.hyper = h;
  return out;
}

}  // namespace pggm

#endif  // PGGM_SCENARIOS_HPP
