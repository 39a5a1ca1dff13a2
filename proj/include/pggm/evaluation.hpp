#ifndef PGGM_EVALUATION_HPP
#define PGGM_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pggm/errors.hpp"
#include "pggm/gibbs.hpp"
#include "pggm/model.hpp"

namespace pggm {

struct PosteriorSummary {
  Eigen::MatrixXd Delta_hat;        // q x p, posterior median with exact-zero columns
  Eigen::MatrixXd Omega_hat;        // q x q, posterior mean
  Eigen::MatrixXd B_hat;            // p x q
  Eigen::VectorXd inclusion;        // per column
  Eigen::VectorXd group_inclusion;  // per group
  std::vector<char> support;        // non-zero columns of Delta_hat
  std::size_t draws = 0;
};

/// Median of a non-empty sample (mean of the two middle values for even sizes).
inline double median(std::vector<double> v) {
  if (v.empty()) throw InvalidParameter("median of an empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

/// Sample standard deviation (0 for a single value).
inline double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// A column of Delta_hat is zero iff its inclusion frequency is below 1/2;
/// otherwise it is the entrywise median over all retained draws.
inline PosteriorSummary summarize(const ChainOutput& chain) {
  const std::size_t nd = chain.draw_count();
  if (nd == 0) throw InvalidParameter("summarize: the chain has no retained draws");
  const Eigen::Index q = chain.q, p = chain.p;
  PosteriorSummary s;
  s.draws = nd;

  std::vector<std::vector<std::vector<double>>> values(static_cast<std::size_t>(p));
  Eigen::VectorXd hits = Eigen::VectorXd::Zero(p);
  const int m = chain.groups.m();
  Eigen::VectorXd group_hits = Eigen::VectorXd::Zero(m);
  for (const SparseDeltaDraw& d : chain.delta) {
    std::vector<char> group_seen(static_cast<std::size_t>(m), 0);
    for (std::size_t k = 0; k < d.columns.size(); ++k) {
      const int i = d.columns[k];
      hits(i) += 1.0;
      group_seen[static_cast<std::size_t>(chain.groups.group_of(i))] = 1;
      auto& col = values[static_cast<std::size_t>(i)];
      if (col.empty()) col.resize(static_cast<std::size_t>(q));
      for (Eigen::Index r = 0; r < q; ++r) col[static_cast<std::size_t>(r)].push_back(d.values(r, static_cast<Eigen::Index>(k)));
    }
    for (int g = 0; g < m; ++g) group_hits(g) += group_seen[static_cast<std::size_t>(g)];
  }
  s.inclusion = hits / static_cast<double>(nd);
  s.group_inclusion = group_hits / static_cast<double>(nd);

  s.Delta_hat = Eigen::MatrixXd::Zero(q, p);
  s.support.assign(static_cast<std::size_t>(p), 0);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (s.inclusion(i) < 0.5) continue;
    auto& col = values[static_cast<std::size_t>(i)];
    const std::size_t zeros = nd - col[0].size();
    for (Eigen::Index r = 0; r < q; ++r) {
      std::vector<double> v = col[static_cast<std::size_t>(r)];
      v.insert(v.end(), zeros, 0.0);
      s.Delta_hat(r, i) = median(std::move(v));
    }
    s.support[static_cast<std::size_t>(i)] = !(s.Delta_hat.col(i).array() == 0.0).all();
  }

  s.Omega_hat = Eigen::MatrixXd::Zero(q, q);
  for (const auto& o : chain.omega) s.Omega_hat += o;
  s.Omega_hat /= static_cast<double>(nd);
  s.Omega_hat = (0.5 * (s.Omega_hat + s.Omega_hat.transpose())).eval();
  s.B_hat = reparam_B(s.Delta_hat, s.Omega_hat);
  return s;
}

struct FScore {
  double f = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  int tp = 0, fp = 0, fn = 0;
  bool degenerate = false;  // F undefined (precision + recall = 0), reported as 0
};

inline FScore f_score(const std::vector<char>& estimated, const std::vector<char>& truth) {
  if (estimated.size() != truth.size()) throw DimensionMismatch("f_score: masks differ in length");
  FScore r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool e = estimated[i], t = truth[i];
    if (e && t) ++r.tp;
    else if (e && !t) ++r.fp;
    else if (!e && t) ++r.fn;
  }
  r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
  if (r.precision + r.recall > 0.0) {
    r.f = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  } else {
    r.f = 0.0;
    r.degenerate = true;
  }
  return r;
}

/// ||Y - X B||_F^2 / (n q) on a held-out set.
inline double mspe(const Eigen::MatrixXd& B_hat, const Dataset& test) {
  if (test.n() == 0) throw InvalidParameter("mspe: empty test set");
  if (B_hat.rows() != test.p() || B_hat.cols() != test.q())
    throw DimensionMismatch("mspe: B_hat must be p x q");
  return (test.Y - test.X * B_hat).squaredNorm() / static_cast<double>(test.n() * test.q());
}

struct MetricSummary {
  double median = 0.0;
  double sd = 0.0;
  int count = 0;
};

inline MetricSummary aggregate(const std::vector<double>& values) {
  if (values.empty()) throw InvalidParameter("aggregate: no values");
  return MetricSummary{median(values), sample_sd(values), static_cast<int>(values.size())};
}

/// Per-metric median and standard deviation across repetitions.
inline std::map<std::string, MetricSummary> aggregate_runs(
    const std::vector<std::map<std::string, double>>& runs) {
  if (runs.empty()) throw InvalidParameter("aggregate_runs: no repetitions");
  std::map<std::string, std::vector<double>> columns;
  for (const auto& run : runs)
    for (const auto& [name, value] : run) columns[name].push_back(value);
  std::map<std::string, MetricSummary> out;
  for (const auto& [name, values] : columns) out[name] = aggregate(values);
  return out;
}

}  // namespace pggm

#endif  // PGGM_EVALUATION_HPP
