// pggm_cli: simulate / fit / validate.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure
// (including failed validation checks).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pggm/pggm.hpp"

namespace {

using pggm::io::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

// Options settable by flag or by the JSON config file; flags win.
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* option(const std::string& key, T& var, const std::string& desc) {
    CLI::Option* opt = app_->add_option("--" + flag_name(key), var, desc);
    add_entry(key, opt, var);
    return opt;
  }

  CLI::Option* flag(const std::string& key, bool& var, const std::string& desc, const std::string& names = "") {
    CLI::Option* opt = app_->add_flag(names.empty() ? "--" + flag_name(key) : names, var, desc);
    add_entry(key, opt, var);
    return opt;
  }

  void merge_config(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw pggm::DataError("cannot open config file " + path);
    json cfg;
    try {
      cfg = json::parse(in);
    } catch (const json::parse_error& e) {
      throw pggm::DataError(path + ": " + e.what());
    }
    if (!cfg.is_object()) throw pggm::DataError(path + ": config must be a JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      auto e = entries_.find(it.key());
      if (e == entries_.end()) throw pggm::InvalidParameter("unknown config key '" + it.key() + "'");
      from_config_.insert(it.key());
      if (e->second.opt->count() > 0) continue;
      try {
        e->second.set(it.value());
      } catch (const json::exception&) {
        throw pggm::InvalidParameter("config key '" + it.key() + "' has the wrong type");
      }
    }
  }

  // Set explicitly, by flag or config file.
  bool given(const std::string& key) const {
    auto e = entries_.find(key);
    return (e != entries_.end() && e->second.opt->count() > 0) || from_config_.count(key) > 0;
  }

  json resolved(const std::vector<std::string>& exclude = {}) const {
    json out = json::object();
    for (const auto& key : order_) {
      if (std::find(exclude.begin(), exclude.end(), key) != exclude.end()) continue;
      out[key] = entries_.at(key).get();
    }
    return out;
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::function<void(const json&)> set;
    std::function<json()> get;
  };

  static std::string flag_name(std::string key) {
    for (char& c : key)
      if (c == '_') c = '-';
    return key;
  }

  template <class T>
  void add_entry(const std::string& key, CLI::Option* opt, T& var) {
    entries_[key] = Entry{opt, [&var](const json& j) { var = j.get<T>(); }, [&var] { return json(var); }};
    order_.push_back(key);
  }

  CLI::App* app_;
  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
  std::set<std::string> from_config_;
};

// Chain settings shared by simulate and fit.
struct ChainFlags {
  int iterations = 3000;
  int burn_in = 2000;
  int thin = 1;
  bool thorough = false;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string shrinkage = "adaptative";
  std::string identifiability = "free";
  double lambda0 = 0.5;
  int em_period = 100;
  bool no_em = false;

  void add(Settings& s) {
    s.option("seed", seed, "Random seed");
    s.option("iterations", iterations, "Gibbs sweeps (default 3000)");
    s.option("burn_in", burn_in, "Burn-in sweeps (default 2000)");
    s.option("thin", thin, "Keep every k-th post burn-in draw");
    s.flag("thorough", thorough, "Long-run preset: 10000 sweeps, 5000 burn-in");
    s.option("threads", threads, "Worker threads");
    s.option("shrinkage", shrinkage, "EM shrinkage mode: adaptative | global");
    s.option("identifiability", identifiability, "sgs only: free | fix-lambda | fix-nu");
    s.option("lambda0", lambda0, "Initial prior mean of the shrinkage parameters");
    s.option("em_period", em_period, "Sweeps between Monte Carlo EM updates");
    s.flag("no_em", no_em, "Keep the shrinkage rates fixed");
  }

  void apply_preset(const Settings& s) {
    if (!thorough) return;
    if (!s.given("iterations")) iterations = 10000;
    if (!s.given("burn_in")) burn_in = 5000;
  }

  pggm::GibbsConfig gibbs() const {
    pggm::GibbsConfig c;
    c.iterations = iterations;
    c.burn_in = burn_in;
    c.thin = thin;
    c.seed = seed;
    c.em.enabled = !no_em;
    c.em.period = em_period;
    c.validate();
    if (threads < 1) throw pggm::InvalidParameter("threads must be >= 1");
    if (!(lambda0 > 0.0)) throw pggm::InvalidParameter("lambda0 must be positive");
    return c;
  }

  void adjust(pggm::Hyperparameters& h, Eigen::Index q, const pggm::GroupStructure& groups) const {
    const pggm::Hyperparameters d = pggm::Hyperparameters::defaults(h.variant, q, groups, lambda0);
    h.ell = d.ell;
    h.gamma = d.gamma;
    h.shrinkage = pggm::parse_shrinkage(shrinkage);
    h.identifiability = pggm::parse_identifiability(identifiability);
  }
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw pggm::DataError("cannot create output directory " + dir + ": " + ec.message());
}

json provenance(const json& config, std::uint64_t seed) {
  return json{{"tool", "pggm_cli"}, {"version", kVersion}, {"seed", seed}, {"config", config}};
}

json aggregate_json(const std::vector<pggm::RepetitionResult>& results) {
  std::vector<std::map<std::string, double>> ok;
  for (const auto& r : results)
    if (!r.error) ok.push_back(r.metrics);
  json out = json::object();
  if (ok.empty()) return out;
  for (const auto& [name, s] : pggm::aggregate_runs(ok))
    out[name] = json{{"median", s.median}, {"sd", s.sd}, {"count", s.count}};
  return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string scenario = "1";
  int ne = 400;
  int nv = 100;
  double rho = 0.0;
  int reps = 10;
  std::string out = "pggm_out";
  std::string config;
  std::string export_dir;
  ChainFlags chain;
};

// Writes the data of every repetition as CSV plus the ground truth.
void export_scenario(const pggm::ScenarioSpec& spec, std::uint64_t seed, int reps, const std::string& dir,
                     const json& prov) {
  ensure_dir(dir);
  auto write_matrix = [&](const std::string& name, const Eigen::MatrixXd& m) {
    std::ostringstream ss;
    pggm::io::write_csv(ss, m);
    pggm::io::write_text((fs::path(dir) / name).string(), ss.str());
  };
  for (int r = 0; r < reps; ++r) {
    pggm::Rng data_rng = pggm::Rng(seed).split(static_cast<std::uint64_t>(r)).split(0);
    const pggm::ScenarioData sd = pggm::generate(spec, data_rng);
    const std::string tag = "_" + std::to_string(r) + ".csv";
    write_matrix("x_train" + tag, sd.train.X);
    write_matrix("y_train" + tag, sd.train.Y);
    write_matrix("x_test" + tag, sd.test.X);
    write_matrix("y_test" + tag, sd.test.Y);
    std::vector<int> support;
    for (std::size_t i = 0; i < sd.truth.support.size(); ++i)
      if (sd.truth.support[i]) support.push_back(static_cast<int>(i));
    json truth{{"provenance", prov}, {"repetition", r}, {"support", support},
               {"active_groups", sd.truth.active_groups}, {"B", pggm::io::to_json(sd.truth.B)},
               {"Delta", pggm::io::to_json(sd.truth.Delta)}, {"Omega", pggm::io::to_json(sd.truth.Omega)}};
    pggm::io::write_text((fs::path(dir) / ("truth_" + std::to_string(r) + ".json")).string(),
                         pggm::io::dump_json(truth));
    if (r == 0)
      pggm::io::write_text((fs::path(dir) / "groups.json").string(), json(sd.groups.sizes()).dump() + "\n");
  }
}

int cmd_simulate(SimulateArgs& a, const Settings& settings) {
  a.chain.apply_preset(settings);
  pggm::ScenarioSpec spec = pggm::parse_scenario(a.scenario);
  spec.n_e = a.ne;
  spec.n_v = a.nv;
  spec.rho_x = a.rho;
  spec.validate();
  if (a.reps < 1) throw pggm::InvalidParameter("reps must be >= 1");
  const pggm::GibbsConfig gibbs = a.chain.gibbs();

  const ChainFlags& cf = a.chain;
  const pggm::HyperAdjust adjust = [&cf](pggm::Hyperparameters& h, const pggm::ScenarioData& sd) {
    cf.adjust(h, sd.train.q(), sd.groups);
  };

  // The report does not depend on the thread count.
  const json config = settings.resolved({"threads", "out", "chain_dump", "export_dir"});
  if (!a.export_dir.empty()) export_scenario(spec, a.chain.seed, a.reps, a.export_dir, provenance(config, a.chain.seed));
  const auto results = pggm::run_repetitions(spec, gibbs, a.chain.seed, a.reps, a.chain.threads, adjust);

  int failed = 0;
  json reps = json::array();
  for (const auto& r : results) {
    json j{{"repetition", r.repetition}};
    json m = json::object();
    for (const auto& [k, v] : r.metrics) m[k] = v;
    j["metrics"] = m;
    if (r.error) {
      j["error"] = *r.error;
      ++failed;
    }
    reps.push_back(j);
  }
  const std::string variant = pggm::to_string(results.front().variant);
  json report{{"command", "simulate"},
              {"provenance", provenance(config, a.chain.seed)},
              {"scenario",
               {{"name", spec.name()}, {"n_e", spec.n_e}, {"n_v", spec.n_v}, {"rho", spec.rho_x}, {"variant", variant}}},
              {"status", failed == 0 ? "ok" : "failed"},
              {"failed_repetitions", failed},
              {"aggregate", aggregate_json(results)},
              {"repetitions", reps}};

  ensure_dir(a.out);
  pggm::io::write_text((fs::path(a.out) / "report.json").string(), pggm::io::dump_json(report));

  std::ostringstream csv;
  csv << "# " << pggm::io::dump_json_line(provenance(config, a.chain.seed)) << '\n';
  csv << "scenario,n_e,rho,variant,repetition,metric,value\n";
  for (const auto& r : results)
    for (const auto& [k, v] : r.metrics)
      csv << spec.name() << ',' << spec.n_e << ',' << pggm::io::format_double(spec.rho_x) << ',' << variant << ','
          << r.repetition << ',' << k << ',' << pggm::io::format_double(v) << '\n';
  pggm::io::write_text((fs::path(a.out) / "metrics.csv").string(), csv.str());

  for (const auto& [name, s] : report["aggregate"].items())
    std::cout << name << ": median " << s["median"].get<double>() << " sd " << s["sd"].get<double>() << '\n';
  if (failed > 0) {
    json err{{"status", "error"}, {"type", "numerical"}, {"failed_repetitions", failed}};
    for (const auto& r : results)
      if (r.error) err["messages"].push_back(json{{"repetition", r.repetition}, {"error", *r.error}});
    std::cerr << pggm::io::dump_json_line(err) << '\n';
    return kNumerical;
  }
  return kOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string x, y, groups;
  std::string variant = "s";
  bool standardize = true;
  std::string out = "pggm_fit";
  std::string config;
  double a = 1.0, b = 1.0, a2 = 1.0, b2 = 1.0;
  std::string chain_dump;
  int dump_thin = 10;
  int subsample_reps = 0;
  int subsample_size = 0;
  ChainFlags chain;
};

struct FitResult {
  pggm::PosteriorSummary summary;
  pggm::ChainOutput chain;
  Eigen::MatrixXd B_raw;
  Eigen::VectorXd intercept;
  pggm::Scaling scaling;
};

FitResult fit_once(const pggm::Dataset& raw, bool standardize, const pggm::GroupStructure& groups,
                   const pggm::Hyperparameters& hyper, const pggm::GibbsConfig& gibbs, pggm::Rng& rng) {
  FitResult r;
  pggm::Dataset data = raw;
  if (standardize) {
    pggm::StandardizedData s = pggm::standardize(raw);
    data = s.data;
    r.scaling = s.scaling;
  } else {
    r.scaling.x_mean = Eigen::VectorXd::Zero(raw.p());
    r.scaling.x_scale = Eigen::VectorXd::Ones(raw.p());
    r.scaling.y_mean = Eigen::VectorXd::Zero(raw.q());
    r.scaling.y_scale = Eigen::VectorXd::Ones(raw.q());
  }
  r.chain = pggm::run_chain(data, groups, hyper, gibbs, rng);
  if (r.chain.error) throw pggm::NumericalError(*r.chain.error);
  r.summary = pggm::summarize(r.chain);
  r.B_raw = r.scaling.destandardize_B(r.summary.B_hat);
  r.intercept = r.scaling.y_mean - r.B_raw.transpose() * r.scaling.x_mean;
  return r;
}

void write_chain_dump(const std::string& path, const pggm::ChainOutput& chain, int thin, const json& prov) {
  std::ostringstream out;
  out << "# " << pggm::io::dump_json_line(prov) << '\n';
  out << "sweep,block,row,col,value\n";
  auto f = pggm::io::format_double;
  for (std::size_t k = 0; k < chain.draw_count(); k += static_cast<std::size_t>(thin)) {
    const int t = chain.draw_sweeps[k];
    const auto& d = chain.delta[k];
    for (std::size_t c = 0; c < d.columns.size(); ++c)
      for (Eigen::Index r = 0; r < d.values.rows(); ++r)
        out << t << ",Delta," << r << ',' << d.columns[c] << ',' << f(d.values(r, static_cast<Eigen::Index>(c))) << '\n';
    const auto& o = chain.omega[k];
    for (Eigen::Index j = 0; j < o.cols(); ++j)
      for (Eigen::Index i = 0; i <= j; ++i) out << t << ",Omega," << i << ',' << j << ',' << f(o(i, j)) << '\n';
    for (Eigen::Index i = 0; i < chain.lambda[k].size(); ++i)
      out << t << ",lambda," << i << ",0," << f(chain.lambda[k](i)) << '\n';
    if (!chain.nu.empty())
      for (Eigen::Index i = 0; i < chain.nu[k].size(); ++i) out << t << ",nu," << i << ",0," << f(chain.nu[k](i)) << '\n';
    out << t << ",pi,0,0," << f(chain.pi[k]) << '\n';
    if (!chain.pi2.empty()) out << t << ",pi2,0,0," << f(chain.pi2[k]) << '\n';
  }
  pggm::io::write_text(path, out.str());
}

int cmd_fit(FitArgs& a, const Settings& settings) {
  a.chain.apply_preset(settings);
  const pggm::Variant variant = pggm::parse_variant(a.variant);
  if (a.x.empty() || a.y.empty()) throw pggm::InvalidParameter("fit needs --x and --y");
  pggm::Dataset data;
  data.X = pggm::io::read_csv(a.x).values;
  data.Y = pggm::io::read_csv(a.y).values;
  if (data.X.rows() != data.Y.rows())
    throw pggm::DimensionMismatch("X has " + std::to_string(data.X.rows()) + " rows but Y has " +
                                  std::to_string(data.Y.rows()));
  data.validate();
  const int p = static_cast<int>(data.p());

  pggm::GroupStructure groups = pggm::GroupStructure::singletons(p);
  if (variant == pggm::Variant::gs || variant == pggm::Variant::sgs) {
    if (a.groups.empty()) throw pggm::InvalidParameter("variant " + a.variant + " needs a --groups file");
    groups = pggm::io::read_groups(a.groups);
  } else if (!a.groups.empty()) {
    groups = pggm::io::read_groups(a.groups);
  }
  if (groups.p() != p)
    throw pggm::DimensionMismatch("group sizes sum to " + std::to_string(groups.p()) + " but X has " +
                                  std::to_string(p) + " columns");
  if (variant == pggm::Variant::none || variant == pggm::Variant::s) groups = pggm::GroupStructure::singletons(p);

  pggm::Hyperparameters hyper = pggm::Hyperparameters::defaults(variant, data.q(), groups, a.chain.lambda0);
  a.chain.adjust(hyper, data.q(), groups);
  hyper.a = a.a;
  hyper.b = a.b;
  hyper.a2 = a.a2;
  hyper.b2 = a.b2;
  hyper.validate(data.q(), groups);
  const pggm::GibbsConfig gibbs = a.chain.gibbs();
  if (a.dump_thin < 1) throw pggm::InvalidParameter("dump-thin must be >= 1");
  if (a.subsample_reps < 0) throw pggm::InvalidParameter("subsample-reps must be >= 0");
  if (a.subsample_reps > 0 && !a.chain_dump.empty())
    throw pggm::InvalidParameter("chain-dump applies to a single fit, not to subsample-reps");

  const json config = settings.resolved({"threads", "out", "chain_dump", "export_dir"});
  const json prov = provenance(config, a.chain.seed);
  json report{{"command", "fit"}, {"provenance", prov}, {"variant", a.variant},
              {"n", data.n()}, {"p", data.p()}, {"q", data.q()}, {"groups", groups.sizes()}};

  ensure_dir(a.out);
  if (a.subsample_reps == 0) {
    pggm::Rng rng(a.chain.seed);
    const FitResult r = fit_once(data, a.standardize, groups, hyper, gibbs, rng);
    const pggm::PosteriorSummary& s = r.summary;
    json scale{{"standardized", a.standardize},
               {"x_mean", pggm::io::to_json(r.scaling.x_mean)},
               {"x_scale", pggm::io::to_json(r.scaling.x_scale)},
               {"y_mean", pggm::io::to_json(r.scaling.y_mean)},
               {"y_scale", pggm::io::to_json(r.scaling.y_scale)},
               {"constant_x_columns", r.scaling.constant_x}};
    std::vector<int> support;
    for (int i = 0; i < p; ++i)
      if (s.support[static_cast<std::size_t>(i)]) support.push_back(i);
    report["summary"] = json{{"draws", s.draws},
                             {"support", support},
                             {"inclusion", pggm::io::to_json(s.inclusion)},
                             {"group_inclusion", pggm::io::to_json(s.group_inclusion)},
                             {"Delta_hat", pggm::io::to_json(s.Delta_hat)},
                             {"Omega_hat", pggm::io::to_json(s.Omega_hat)},
                             {"B_hat_standardized", pggm::io::to_json(s.B_hat)},
                             {"B_hat", pggm::io::to_json(r.B_raw)},
                             {"intercept", pggm::io::to_json(r.intercept)},
                             {"final_ell", pggm::io::to_json(r.chain.final_hyper.ell)},
                             {"final_gamma", pggm::io::to_json(r.chain.final_hyper.gamma)},
                             {"omega_mode_propagated", r.chain.omega_mode_propagated}};
    report["scaling"] = scale;
    if (!a.chain_dump.empty()) {
      const fs::path parent = fs::path(a.chain_dump).parent_path();
      if (!parent.empty()) ensure_dir(parent.string());
    }
    if (!a.chain_dump.empty()) write_chain_dump(a.chain_dump, r.chain, a.dump_thin, prov);
    std::cout << "selected " << support.size() << " of " << p << " predictors from " << s.draws << " draws\n";
  } else {
    const int n = static_cast<int>(data.n());
    const int k = a.subsample_size > 0 ? a.subsample_size : n / 2;
    if (k < 2 || k > n) throw pggm::InvalidParameter("subsample-size must lie in [2, n]");
    std::vector<std::optional<FitResult>> fits(static_cast<std::size_t>(a.subsample_reps));
    std::vector<std::string> errors(fits.size());
    pggm::parallel_for(a.subsample_reps, a.chain.threads, [&](int rep) {
      pggm::Rng stream = pggm::Rng(a.chain.seed).split(static_cast<std::uint64_t>(rep));
      pggm::Rng rows_rng = stream.split(0), chain_rng = stream.split(1);
      const std::vector<int> rows = pggm::detail::choose_indices(rows_rng, n, k);
      pggm::Dataset sub;
      sub.X.resize(k, data.p());
      sub.Y.resize(k, data.q());
      for (int i = 0; i < k; ++i) {
        sub.X.row(i) = data.X.row(rows[static_cast<std::size_t>(i)]);
        sub.Y.row(i) = data.Y.row(rows[static_cast<std::size_t>(i)]);
      }
      try {
        fits[static_cast<std::size_t>(rep)] = fit_once(sub, a.standardize, groups, hyper, gibbs, chain_rng);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(rep)] = e.what();
      }
    });
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(p);
    std::vector<Eigen::MatrixXd> bs;
    json per_rep = json::array();
    int failed = 0;
    for (std::size_t r = 0; r < fits.size(); ++r) {
      if (!fits[r]) {
        per_rep.push_back(json{{"repetition", r}, {"error", errors[r]}});
        ++failed;
        continue;
      }
      std::vector<int> support;
      for (int i = 0; i < p; ++i)
        if (fits[r]->summary.support[static_cast<std::size_t>(i)]) {
          support.push_back(i);
          freq(i) += 1.0;
        }
      bs.push_back(fits[r]->B_raw);
      per_rep.push_back(json{{"repetition", r}, {"support", support}});
    }
    json agg = json::object();
    if (!bs.empty()) {
      freq /= static_cast<double>(bs.size());
      Eigen::MatrixXd med(data.p(), data.q());
      for (Eigen::Index i = 0; i < med.rows(); ++i)
        for (Eigen::Index j = 0; j < med.cols(); ++j) {
          std::vector<double> v;
          for (const auto& b : bs) v.push_back(b(i, j));
          med(i, j) = pggm::median(v);
        }
      agg = json{{"selection_frequency", pggm::io::to_json(freq)}, {"B_hat_median", pggm::io::to_json(med)}};
    }
    report["subsample"] = json{{"repetitions", a.subsample_reps}, {"size", k}, {"failed", failed},
                               {"aggregate", agg}, {"per_repetition", per_rep}};
    if (failed > 0) report["status"] = "failed";
    std::cout << "subsample fits: " << (a.subsample_reps - failed) << " of " << a.subsample_reps << " succeeded\n";
    ensure_dir(a.out);
    pggm::io::write_text((fs::path(a.out) / "summary.json").string(), pggm::io::dump_json(report));
    return failed > 0 ? kNumerical : kOk;
  }
  report["status"] = "ok";
  ensure_dir(a.out);
  pggm::io::write_text((fs::path(a.out) / "summary.json").string(), pggm::io::dump_json(report));
  return kOk;
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  std::uint64_t seed = 2024;
  int instances = 8;
  std::size_t draws = 100000;
  bool mutate_slab_sign = false;
  std::string out;
};

int cmd_validate(const ValidateArgs& a) {
  if (a.instances < 1) throw pggm::InvalidParameter("instances must be >= 1");
  json report{{"command", "validate"},
              {"provenance",
               provenance(json{{"seed", a.seed}, {"instances", a.instances}, {"draws", a.draws},
                               {"mutate_slab_sign", a.mutate_slab_sign}},
                          a.seed)}};
  bool ok = true;

  pggm::CoherenceOptions opt;
  opt.seed = a.seed;
  opt.instances = a.instances;
  opt.flip_slab_mean = a.mutate_slab_sign;
  const pggm::CoherenceReport coh = pggm::run_coherence_suite(opt);
  std::map<std::string, std::pair<int, double>> blocks;  // block -> (pairs, max error)
  std::map<std::string, int> block_failures;
  for (const auto& c : coh.checks) {
    const std::string key = c.variant + " " + c.block + " q=" + std::to_string(c.q);
    auto& b = blocks[key];
    ++b.first;
    b.second = std::max(b.second, c.rel_error);
    if (!c.passed) ++block_failures[key];
  }
  json oracle = json::array();
  for (const auto& [key, b] : blocks) {
    const bool pass = block_failures[key] == 0;
    std::cout << (pass ? "PASS" : "FAIL") << "  oracle " << key << ": " << b.first << " pairs, max rel error "
              << b.second << " (bound " << coh.tolerance << ")\n";
    oracle.push_back(json{{"check", key}, {"pairs", b.first}, {"max_rel_error", b.second}, {"passed", pass}});
  }
  std::cout << (coh.passed() ? "PASS" : "FAIL") << "  conditional-vs-joint oracle: " << coh.checks.size()
            << " pairs, max rel error " << coh.max_rel_error << "\n";
  ok = ok && coh.passed();
  report["coherence"] = json{{"pairs", coh.checks.size()},
                             {"max_rel_error", coh.max_rel_error},
                             {"tolerance", coh.tolerance},
                             {"failures", coh.failures},
                             {"passed", coh.passed()},
                             {"blocks", oracle}};

  json dist = json::array();
  for (const auto& it : pggm::run_distribution_suite(a.seed, a.draws)) {
    std::cout << (it.passed ? "PASS" : "FAIL") << "  " << it.name << ": " << it.measured << " (bound " << it.bound
              << ") " << it.detail << "\n";
    dist.push_back(json{{"check", it.name}, {"measured", it.measured}, {"bound", it.bound}, {"passed", it.passed},
                        {"detail", it.detail}});
    ok = ok && it.passed;
  }
  report["distributions"] = dist;

  json red = json::array();
  for (const auto& it : pggm::run_reduction_suite(a.seed)) {
    std::cout << (it.passed ? "PASS" : "FAIL") << "  " << it.name << ": " << it.measured << " (bound " << it.bound
              << ") " << it.detail << "\n";
    red.push_back(json{{"check", it.name}, {"measured", it.measured}, {"bound", it.bound}, {"passed", it.passed},
                       {"detail", it.detail}});
    ok = ok && it.passed;
  }
  report["reductions"] = red;
  report["status"] = ok ? "ok" : "failed";
  if (!a.out.empty()) pggm::io::write_text(a.out, pggm::io::dump_json(report));
  std::cout << (ok ? "all checks passed" : "some checks FAILED") << "\n";
  return ok ? kOk : kNumerical;
}

int report_error(const std::string& type, const std::string& message, int code) {
  std::cerr << pggm::io::dump_json_line(json{{"status", "error"}, {"type", type}, {"message", message}}) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian partial Gaussian graphical models: spike-and-slab Gibbs samplers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Run benchmark repetitions of a synthetic scenario");
  Settings sim_settings(simulate);
  sim_settings.option("scenario", sim.scenario, "Scenario 0..6, or the reduced 4r / 6r");
  sim_settings.option("ne", sim.ne, "Training observations (default 400)");
  sim_settings.option("nv", sim.nv, "Validation observations (default 100)");
  sim_settings.option("rho", sim.rho, "AR(1) correlation of the predictors");
  sim_settings.option("reps", sim.reps, "Repetitions (default 10)");
  sim_settings.option("out", sim.out, "Output directory");
  sim_settings.option("export_dir", sim.export_dir, "Also write each repetition's data and truth here");
  sim.chain.add(sim_settings);
  simulate->add_option("--config", sim.config, "JSON config file (flags take precedence)");

  FitArgs fit;
  CLI::App* fitc = app.add_subcommand("fit", "Fit a model to CSV data");
  Settings fit_settings(fitc);
  fit_settings.option("x", fit.x, "Predictor CSV (n x p)");
  fit_settings.option("y", fit.y, "Response CSV (n x q)");
  fit_settings.option("groups", fit.groups, "JSON array of group sizes (gs, sgs)");
  fit_settings.option("variant", fit.variant, "none | s | gs | sgs");
  fit_settings.flag("standardize", fit.standardize, "Standardize X and Y before fitting (default on)",
                    "--standardize,!--no-standardize");
  fit_settings.option("out", fit.out, "Output directory");
  fit_settings.option("a", fit.a, "Beta prior of pi (pi_1): a");
  fit_settings.option("b", fit.b, "Beta prior of pi (pi_1): b");
  fit_settings.option("a2", fit.a2, "Beta prior of pi_2 (sgs): a");
  fit_settings.option("b2", fit.b2, "Beta prior of pi_2 (sgs): b");
  fit_settings.option("chain_dump", fit.chain_dump, "Write retained draws to this CSV");
  fit_settings.option("dump_thin", fit.dump_thin, "Keep every k-th draw in the chain dump (default 10)");
  fit_settings.option("subsample_reps", fit.subsample_reps, "Refit on this many random subsamples");
  fit_settings.option("subsample_size", fit.subsample_size, "Rows per subsample (default n/2)");
  fit.chain.add(fit_settings);
  fitc->add_option("--config", fit.config, "JSON config file (flags take precedence)");

  ValidateArgs val;
  CLI::App* validate = app.add_subcommand("validate", "Run the density-ratio oracle, distribution and reduction checks");
  validate->add_option("--seed", val.seed, "Random seed");
  validate->add_option("--instances", val.instances, "Random instances per variant and q");
  validate->add_option("--draws", val.draws, "Draws per moment check");
  validate->add_flag("--mutate-slab-sign", val.mutate_slab_sign, "Flip the sign of the slab mean (must fail)");
  validate->add_option("--out", val.out, "Write the JSON report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) {
      sim_settings.merge_config(sim.config);
      return cmd_simulate(sim, sim_settings);
    }
    if (*fitc) {
      fit_settings.merge_config(fit.config);
      return cmd_fit(fit, fit_settings);
    }
    return cmd_validate(val);
  } catch (const pggm::InvalidParameter& e) {
    return report_error("usage", e.what(), kUsage);
  } catch (const pggm::DimensionMismatch& e) {
    return report_error("data", e.what(), kData);
  } catch (const pggm::DataError& e) {
    return report_error("data", e.what(), kData);
  } catch (const std::exception& e) {
    return report_error("numerical", e.what(), kNumerical);
  }
}
