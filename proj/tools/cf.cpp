// cf: command-line front end for Cluster Forests, the baseline ensembles,
// synthetic simulations, feature profiles and perturbation sweeps.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cforest/cforest.hpp"

namespace fs = std::filesystem;
using namespace cforest;

namespace {

/// Ordered key=value record of everything that determines a command's output.
class Config {
 public:
  template <typename T>
  Config& set(const std::string& key, const T& value) {
    std::ostringstream s;
    if constexpr (std::is_floating_point_v<T>)
      s << format_double(value);
    else if constexpr (std::is_same_v<T, bool>)
      s << (value ? "true" : "false");
    else
      s << value;
    entries_.emplace_back(key, s.str());
    return *this;
  }

  void write_header(std::ostream& out, const std::string& command, std::uint64_t seed) const {
    out << "# cforest " << kVersion << '\n';
    out << "# command: " << command << '\n';
    out << "# seed: " << seed << '\n';
    out << "# config:";
    for (const auto& [k, v] : entries_) out << ' ' << k << '=' << v;
    out << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

class Output {
 public:
  Output(std::string dir, std::string command, std::uint64_t seed, Config config)
      : dir_(std::move(dir)), command_(std::move(command)), seed_(seed), config_(std::move(config)) {
    fs::create_directories(dir_);
  }

  std::ofstream open(const std::string& name, bool binary = false) const {
    const auto path = fs::path(dir_) / name;
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw Error(ErrorKind::invalid_input, "cannot write " + path.string());
    if (!binary) config_.write_header(out, command_, seed_);
    return out;
  }

 private:
  std::string dir_, command_;
  std::uint64_t seed_;
  Config config_;
};

struct Stats {
  double mean = 0, sd = 0;
};

Stats summarize(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = std::string(detail::trim(item));
    if (item.empty()) continue;
    T value{};
    std::istringstream conv(item);
    conv >> value;
    if (conv.fail() || !conv.eof()) throw Error(ErrorKind::invalid_input, "bad list element '" + item + "'");
    out.push_back(value);
  }
  if (out.empty()) throw Error(ErrorKind::invalid_input, "empty list '" + text + "'");
  return out;
}

std::string join_features(const std::vector<int>& f) {
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) s += (i ? " " : "") + std::to_string(f[i]);
  return s;
}

// --- shared options --------------------------------------------------------

struct InputOptions {
  std::string input;
  std::string labels_col;
  bool no_header = false;
  bool standardize = false;
  bool categorical = false;

  void add(CLI::App* app) {
    app->add_option("--input", input, "CSV data file")->required();
    app->add_option("--labels-col", labels_col, "label column: header name or 0-based index (negative from end)");
    app->add_flag("--no-header", no_header, "first row is data");
    app->add_flag("--standardize", standardize, "z-score numeric columns before clustering");
    app->add_flag("--categorical", categorical, "treat every feature as categorical");
  }

  LoadedData load() const {
    CsvOptions opts;
    opts.has_header = !no_header;
    if (!labels_col.empty()) opts.label_column = labels_col;
    opts.all_categorical = categorical;
    auto loaded = load_csv(input, opts);
    if (standardize) loaded.data = cforest::standardize(loaded.data);
    return loaded;
  }

  void record(Config& c) const {
    c.set("input", input).set("labels_col", labels_col).set("header", !no_header).set("standardize", standardize);
    c.set("categorical", categorical);
  }
};

struct CFOptions {
  int k = 0;
  int T = 100;
  int b = 2;
  int q = 1;
  int tau_max = 3;
  double beta1 = 10;
  double beta2 = 0.4;
  bool distinct = false;
  std::string aggregator = "ncut";
  std::string regularization = "zero";

  void add(CLI::App* app) {
    app->add_option("--k", k, "final (and base) cluster count; default: number of label classes, else 2");
    app->add_option("--T", T, "ensemble size")->check(CLI::PositiveNumber);
    app->add_option("--b", b, "features sampled per growth attempt")->check(CLI::PositiveNumber);
    app->add_option("--q", q, "feature-competition rounds")->check(CLI::PositiveNumber);
    app->add_option("--tau-max", tau_max, "consecutive failed expansions before stopping")->check(CLI::PositiveNumber);
    app->add_option("--beta1", beta1, "scaling exponent");
    app->add_option("--beta2", beta2, "threshold level in (0,1)");
    app->add_flag("--distinct", distinct, "never re-sample features already in a vector");
    app->add_option("--aggregator", aggregator, "spectral aggregation")->check(CLI::IsMember({"ncut", "njw"}));
    app->add_option("--regularization", regularization, "zero: thresholded entries stay 0; exp: exp of every entry")
        ->check(CLI::IsMember({"zero", "exp"}));
  }

  CFConfig build(int n_classes, std::uint64_t seed, int threads) const {
    CFConfig c;
    c.T = T;
    c.growth.b = b;
    c.growth.q = q;
    c.growth.tau_max = tau_max;
    c.growth.distinct = distinct;
    c.beta1 = beta1;
    c.beta2 = beta2;
    c.n_b = c.n_f = n_classes;
    c.seed = seed;
    c.aggregator = aggregator == "njw" ? SpectralMethod::njw : SpectralMethod::recursive_ncut;
    c.regularization =
        regularization == "exp" ? RegularizationMode::threshold_then_exp : RegularizationMode::zero_preserving;
    c.threads = threads;
    return c;
  }

  void record(Config& c, int n_classes) const {
    c.set("k", n_classes).set("T", T).set("b", b).set("q", q).set("tau_max", tau_max);
    c.set("beta1", beta1).set("beta2", beta2).set("distinct", distinct);
    c.set("aggregator", aggregator).set("regularization", regularization);
  }
};

int resolve_k(int requested, const LoadedData& d) {
  if (requested > 0) return requested;
  if (d.labels) return std::max(2, d.labels->num_classes);
  return 2;
}

std::uint64_t rep_seed(std::uint64_t master, int rep) { return derive_seed(master, 1000, rep); }

// --- run -------------------------------------------------------------------

struct RunCommand {
  InputOptions input;
  CFOptions cf;
  std::uint64_t seed = 0;
  int reps = 1;
  std::string out;

  void add(CLI::App* app) {
    input.add(app);
    cf.add(app);
    app->add_option("--seed", seed, "master seed");
    app->add_option("--reps", reps, "repetitions")->check(CLI::PositiveNumber);
    app->add_option("--out", out, "output directory")->required();
  }

  int exec(int threads) const {
    const auto loaded = input.load();
    const int k = resolve_k(cf.k, loaded);
    Config config;
    input.record(config);
    cf.record(config, k);
    config.set("reps", reps);
    Output files(out, "run", seed, config);

    auto labels_out = files.open("labels.csv");
    labels_out << "rep,point,label\n";
    auto vectors_out = files.open("vectors.csv");
    vectors_out << "rep,vector,kappa,features\n";
    auto summary_out = files.open("summary.csv");
    summary_out << "rep,rho_r,rho_c\n";

    std::vector<double> rr, rc;
    CFResult last;
    for (int rep = 0; rep < reps; ++rep) {
      auto res = run_cluster_forests(loaded.data, cf.build(k, rep_seed(seed, rep), threads));
      for (int i = 0; i < res.labels.size(); ++i) labels_out << rep << ',' << i << ',' << res.labels[i] << '\n';
      for (std::size_t v = 0; v < res.vectors.size(); ++v)
        vectors_out << rep << ',' << v << ',' << format_double(res.vectors[v].kappa_value) << ','
                    << join_features(res.vectors[v].features) << '\n';
      if (loaded.labels) {
        rr.push_back(rho_r(res.labels, *loaded.labels));
        rc.push_back(100 * rho_c(res.labels, *loaded.labels));
        summary_out << rep << ',' << format_double(rr.back()) << ',' << format_double(rc.back()) << '\n';
      } else {
        summary_out << rep << ",,\n";
      }
      if (rep + 1 == reps) last = std::move(res);
    }
    if (loaded.labels) {
      const auto a = summarize(rr), c = summarize(rc);
      summary_out << "mean," << format_double(a.mean) << ',' << format_double(c.mean) << '\n';
      summary_out << "sd," << format_double(a.sd) << ',' << format_double(c.sd) << '\n';
      std::cout << "rho_r " << format_double(a.mean) << " (sd " << format_double(a.sd) << "), rho_c "
                << format_double(c.mean) << " (sd " << format_double(c.sd) << ")\n";
    }
    const Matrix P = last.coassociation.dense();
    auto aff = files.open("affinity.csv");
    write_affinity_csv(aff, P);
    auto bin = files.open("affinity.bin", true);
    write_affinity_binary(bin, P);
    return 0;
  }
};

// --- bench -----------------------------------------------------------------

struct BenchCommand {
  InputOptions input;
  CFOptions cf;
  std::string methods = "cf,ea,rp,bc2";
  bool search = false;
  std::string q_grid;
  double t = 0.5;
  int dim = 5;
  std::uint64_t seed = 0;
  int reps = 1;
  std::string out;

  void add(CLI::App* app) {
    input.add(app);
    cf.add(app);
    app->add_option("--methods", methods, "comma-separated subset of cf,ea,rp,bc2");
    app->add_flag("--search", search, "search EA threshold and RP dimension, keep the best per metric");
    app->add_option("--q-grid", q_grid, "comma-separated q values for cf");
    app->add_option("--t", t, "EA single-linkage threshold when not searching");
    app->add_option("--dim", dim, "RP target dimension when not searching");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--reps", reps, "repetitions")->check(CLI::PositiveNumber);
    app->add_option("--out", out, "output directory")->required();
  }

  struct Row {
    std::string method, setting;
    Stats rr, rc;
  };

  int exec(int threads) const {
    const auto method_list = parse_list<std::string>(methods);
    for (const auto& m : method_list)
      if (m != "cf" && m != "ea" && m != "rp" && m != "bc2") throw Error(ErrorKind::invalid_input, "unknown method '" + m + "'");
    const auto loaded = input.load();
    if (!loaded.labels) throw Error(ErrorKind::invalid_input, "bench needs --labels-col");
    const auto& truth = *loaded.labels;
    const int k = resolve_k(cf.k, loaded);

    Config config;
    input.record(config);
    cf.record(config, k);
    config.set("methods", methods).set("search", search).set("q_grid", q_grid).set("t", t).set("dim", dim);
    config.set("reps", reps);
    Output files(out, "bench", seed, config);

    auto evaluate = [&](auto&& run_once) {
      std::vector<double> rr, rc;
      for (int rep = 0; rep < reps; ++rep) {
        const LabelVector pred = run_once(rep_seed(seed, rep));
        rr.push_back(rho_r(pred, truth));
        rc.push_back(100 * rho_c(pred, truth));
      }
      return std::pair{summarize(rr), summarize(rc)};
    };

    std::vector<Row> rows;
    for (const auto& m : method_list) {
      if (m == "cf") {
        std::vector<int> qs = q_grid.empty() ? std::vector<int>{cf.q} : parse_list<int>(q_grid);
        for (int q : qs) {
          CFOptions o = cf;
          o.q = q;
          auto [a, c] = evaluate([&](std::uint64_t s) { return run_cluster_forests(loaded.data, o.build(k, s, threads)).labels; });
          rows.push_back({"cf", "q=" + std::to_string(q), a, c});
        }
        continue;
      }
      BaselineConfig base;
      base.method = m == "ea" ? BaselineMethod::ea : m == "rp" ? BaselineMethod::rp : BaselineMethod::bc2;
      base.T = cf.T;
      base.n_b = base.n_f = k;
      base.t = t;
      base.dim = std::min(dim, loaded.data.cols());
      base.threads = threads;
      std::vector<std::pair<std::string, BaselineConfig>> settings;
      if (search && m == "ea") {
        for (double tv : {0.3, 0.4, 0.5, 0.6, 0.7, 0.75}) {
          auto c = base;
          c.t = tv;
          settings.emplace_back("t=" + format_double(tv), c);
        }
      } else if (search && m == "rp") {
        for (int d = std::min(5, loaded.data.cols()); d <= loaded.data.cols(); ++d) {
          auto c = base;
          c.dim = d;
          settings.emplace_back("dim=" + std::to_string(d), c);
        }
      } else {
        settings.emplace_back(m == "ea" ? "t=" + format_double(base.t) : m == "rp" ? "dim=" + std::to_string(base.dim) : "-", base);
      }
      for (auto& [name, c] : settings) {
        auto [a, r] = evaluate([&](std::uint64_t s) {
          auto cc = c;
          cc.seed = s;
          return run_baseline(loaded.data, cc).labels;
        });
        rows.push_back({m, name, a, r});
      }
    }

    auto table = files.open("table.csv");
    table << "method,setting,rho_r_mean,rho_r_sd,rho_c_mean,rho_c_sd\n";
    for (const auto& r : rows)
      table << r.method << ',' << r.setting << ',' << format_double(r.rr.mean) << ',' << format_double(r.rr.sd) << ','
            << format_double(r.rc.mean) << ',' << format_double(r.rc.sd) << '\n';

    auto best = files.open("best.csv");
    best << "method,rho_r,rho_r_setting,rho_c,rho_c_setting\n";
    for (const auto& m : method_list) {
      const Row *br = nullptr, *bc = nullptr;
      for (const auto& r : rows) {
        if (r.method != m) continue;
        if (!br || r.rr.mean > br->rr.mean) br = &r;
        if (!bc || r.rc.mean > bc->rc.mean) bc = &r;
      }
      best << m << ',' << format_double(br->rr.mean) << ',' << br->setting << ',' << format_double(bc->rc.mean) << ','
           << bc->setting << '\n';
      std::cout << m << ": rho_r " << format_double(br->rr.mean) << " [" << br->setting << "], rho_c "
                << format_double(bc->rc.mean) << " [" << bc->setting << "]\n";
    }
    return 0;
  }
};

// --- synth -----------------------------------------------------------------

struct SynthCommand {
  std::string preset;
  int n = 0;
  int q = 0;
  int T = 100;
  std::uint64_t seed = 0;
  std::uint64_t preset_seed = 1;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--preset", preset, "g1, g2 or g3")->required()->check(CLI::IsMember({"g1", "g2", "g3"}));
    app->add_option("--n", n, "sample size (default 4000 for g1, 2000 otherwise)");
    app->add_option("--q", q, "feature-competition rounds (default 1, 20, 50)");
    app->add_option("--T", T, "number of clustering vectors")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "master seed");
    app->add_option("--preset-seed", preset_seed, "seed of the random parts of the g1/g2 mixture");
    app->add_option("--out", out, "output directory")->required();
  }

  int exec(int threads) const {
    const GaussianMixtureSpec spec = preset == "g1" ? preset_g1(preset_seed) : preset == "g2" ? preset_g2(preset_seed) : preset_g3();
    const int size = n > 0 ? n : preset == "g1" ? 4000 : 2000;
    const int rounds = q > 0 ? q : preset == "g1" ? 1 : preset == "g2" ? 20 : 50;
    const auto sample = sample_gaussian_mixture(spec, size, derive_seed(seed, 100));

    CFConfig cfg;
    cfg.T = T;
    cfg.growth.q = rounds;
    if (preset == "g1") {
      cfg.growth.b = 1;
      cfg.growth.stop = StoppingRule::attempt_all;
      cfg.growth.distinct = true;
    }
    cfg.seed = derive_seed(seed, 101);
    cfg.threads = threads;

    Config config;
    config.set("preset", preset).set("preset_seed", preset_seed).set("n", size).set("p", static_cast<int>(spec.mu.size()));
    config.set("T", T).set("b", cfg.growth.b).set("q", rounds).set("tau_max", cfg.growth.tau_max);
    config.set("stop", preset == "g1" ? "attempt_all" : "failure_run").set("distinct", cfg.growth.distinct);
    config.set("beta1", cfg.beta1).set("beta2", cfg.beta2);
    Output files(out, "synth", seed, config);

    const auto res = run_cluster_forests(sample.data, cfg);
    const int p = sample.data.cols();

    std::vector<int> by_strength(static_cast<std::size_t>(p));
    std::iota(by_strength.begin(), by_strength.end(), 0);
    std::stable_sort(by_strength.begin(), by_strength.end(),
                     [&](int a, int b) { return std::abs(spec.mu(a)) > std::abs(spec.mu(b)); });
    auto contains_top = [&](const ClusteringVector& v, int top) {
      for (int f : v.features)
        if (std::find(by_strength.begin(), by_strength.begin() + top, f) != by_strength.begin() + top) return true;
      return false;
    };

    auto occ = files.open("occurrence.csv");
    occ << "vector";
    for (int j = 0; j < p; ++j) occ << ",f" << j;
    occ << '\n';
    int top3 = 0, top5 = 0;
    for (std::size_t v = 0; v < res.vectors.size(); ++v) {
      std::vector<int> count(static_cast<std::size_t>(p), 0);
      for (int f : res.vectors[v].features) ++count[static_cast<std::size_t>(f)];
      occ << v;
      for (int c : count) occ << ',' << c;
      occ << '\n';
      top3 += contains_top(res.vectors[v], 3);
      top5 += contains_top(res.vectors[v], 5);
    }
    auto vec = files.open("vectors.csv");
    vec << "vector,kappa,features,kappa_trace\n";
    for (std::size_t v = 0; v < res.vectors.size(); ++v) {
      vec << v << ',' << format_double(res.vectors[v].kappa_value) << ',' << join_features(res.vectors[v].features) << ',';
      for (std::size_t i = 0; i < res.vectors[v].kappa_trace.size(); ++i)
        vec << (i ? " " : "") << format_double(res.vectors[v].kappa_trace[i]);
      vec << '\n';
    }
    const double acc = rho_c(res.labels, sample.labels);
    auto summary = files.open("summary.csv");
    summary << "preset,n,p,q,T,rho_c,vectors_with_top3,vectors_with_top5\n";
    summary << preset << ',' << size << ',' << p << ',' << rounds << ',' << T << ',' << format_double(acc) << ',' << top3
            << ',' << top5 << '\n';
    std::cout << preset << ": rho_c " << format_double(acc) << ", vectors with a top-3 feature " << top3
              << ", with a top-5 feature " << top5 << " (of " << res.vectors.size() << ")\n";
    return 0;
  }
};

// --- profile ---------------------------------------------------------------

struct ProfileCommand {
  InputOptions input;
  int k = 0;
  std::uint64_t seed = 0;
  std::string out;

  void add(CLI::App* app) {
    input.add(app);
    app->add_option("--k", k, "cluster count (default: number of label classes, else 2)");
    app->add_option("--seed", seed, "seed");
    app->add_option("--out", out, "output directory")->required();
  }

  int exec(int) const {
    const auto loaded = input.load();
    const int kk = resolve_k(k, loaded);
    Config config;
    input.record(config);
    config.set("k", kk);
    Output files(out, "profile", seed, config);
    const auto strength = feature_profile(loaded.data, kk, seed);
    auto f = files.open("profile.csv");
    write_profile_csv(f, strength);
    return 0;
  }
};

// --- perturb ---------------------------------------------------------------

struct PerturbCommand {
  int n1 = 100;
  std::string gamma_grid = "1";
  std::string sigma_grid = "1";
  double nu = 0.05;
  int trials = 1000;
  std::uint64_t seed = 0;
  bool eigen = false;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--n1", n1, "size of the first block")->check(CLI::PositiveNumber);
    app->add_option("--gamma-grid", gamma_grid, "comma-separated size ratios n2/n1 in (0,1]");
    app->add_option("--sigma-grid", sigma_grid, "comma-separated noise levels");
    app->add_option("--nu", nu, "cross-block level");
    app->add_option("--trials", trials, "Monte-Carlo trials per grid point")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "seed; every grid point reuses it (common random numbers)");
    app->add_flag("--eigen", eigen, "also write noiseless eigenvalue asymptotics per gamma");
    app->add_option("--out", out, "output directory")->required();
  }

  int exec(int threads) const {
    const auto gammas = parse_list<double>(gamma_grid);
    const auto sigmas = parse_list<double>(sigma_grid);
    Config config;
    config.set("n1", n1).set("gamma_grid", gamma_grid).set("sigma_grid", sigma_grid).set("nu", nu).set("trials", trials);
    Output files(out, "perturb", seed, config);
    auto sweep = files.open("sweep.csv");
    sweep << "gamma,sigma,nu,n,trials,mean_M,log_rate_emp,log_rate_theory\n";
    for (double g : gammas)
      for (double s : sigmas) {
        PerturbationSpec spec{n1, g, nu, s, trials, seed};
        const auto r = estimate_rate(spec, threads);
        sweep << format_double(g) << ',' << format_double(s) << ',' << format_double(nu) << ',' << spec.n() << ','
              << r.trials_used << ',' << format_double(r.mean_m) << ',' << format_double(r.empirical) << ','
              << format_double(r.theory) << '\n';
        if (!r.warning.empty()) std::cerr << "cf perturb: gamma=" << g << " sigma=" << s << ": " << r.warning << '\n';
      }
    if (eigen) {
      auto e = files.open("eigen.csv");
      e << "gamma,nu,n1,lambda1,lambda2,lambda2_predicted,lambda2_error,block1,block2,max_component_deviation\n";
      for (double g : gammas) {
        const auto r = eigen_asymptotics_check(n1, g, nu);
        e << format_double(g) << ',' << format_double(nu) << ',' << n1 << ',' << format_double(r.lambda1) << ','
          << format_double(r.lambda2) << ',' << format_double(r.lambda2_predicted) << ',' << format_double(r.lambda2_error)
          << ',' << format_double(r.block1_value) << ',' << format_double(r.block2_value) << ','
          << format_double(r.max_component_deviation) << '\n';
      }
    }
    return 0;
  }
};

/// Splices `--config FILE` into argv: every `key=value` line (blank lines
/// and `#` comments skipped) becomes `--key=value` placed right after the
/// subcommand, so flags given on the command line still take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> kept, from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[++i];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
    else {
      kept.push_back(args[i]);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::invalid_input, "cannot read config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto text = detail::trim(line);
      if (text.empty() || text.front() == '#') continue;
      const auto eq = text.find('=');
      if (eq == std::string_view::npos)
        throw Error(ErrorKind::malformed_input, path + ":" + std::to_string(lineno) + ": expected key=value");
      from_file.push_back("--" + std::string(detail::trim(text.substr(0, eq))) + "=" +
                          std::string(detail::trim(text.substr(eq + 1))));
    }
  }
  auto sub = std::find_if(kept.begin(), kept.end(), [](const std::string& a) { return !a.empty() && a[0] != '-'; });
  if (sub != kept.end()) ++sub;
  kept.insert(sub, from_file.begin(), from_file.end());
  return kept;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster Forests ensemble clustering"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  int threads = default_thread_count();
  app.add_option("--threads", threads, "worker threads (default: CF_THREADS or 1)")
      ->check(CLI::PositiveNumber)
      ->envname("CF_THREADS");

  RunCommand run;
  BenchCommand bench;
  SynthCommand synth;
  ProfileCommand profile;
  PerturbCommand perturb;
  auto* run_app = app.add_subcommand("run", "repeated Cluster Forests runs on a CSV dataset");
  auto* bench_app = app.add_subcommand("bench", "compare CF with the EA, RP and bC2 ensembles");
  auto* synth_app = app.add_subcommand("synth", "growth and CF on a synthetic Gaussian-mixture preset");
  auto* profile_app = app.add_subcommand("profile", "single-feature strength profile");
  auto* perturb_app = app.add_subcommand("perturb", "mis-clustering rate under the planted perturbation model");
  run.add(run_app);
  bench.add(bench_app);
  synth.add(synth_app);
  profile.add(profile_app);
  perturb.add(perturb_app);
  for (auto* sub : {run_app, bench_app, synth_app, profile_app, perturb_app}) {
    sub->add_option("--config", "key=value file of long option names; command-line flags win");
    sub->add_option("--threads", threads, "worker threads (default: CF_THREADS or 1)")->check(CLI::PositiveNumber);
  }

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const Error& e) {
    std::cerr << "cf: " << e.what() << '\n';
    return 2;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (*run_app) return run.exec(threads);
    if (*bench_app) return bench.exec(threads);
    if (*synth_app) return synth.exec(threads);
    if (*profile_app) return profile.exec(threads);
    if (*perturb_app) return perturb.exec(threads);
  } catch (const Error& e) {
    std::cerr << "cf: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "cf: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
