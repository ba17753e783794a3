// bpgmf: experiment runner, statistics, verification suites and plots.

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bpgmf/bpgmf.hpp"

namespace {

using namespace bpgmf;

// Options shared by run and stats.
struct ProblemOpts {
  std::string data;
  std::string ml_format = "ml100k";
  std::uint64_t data_seed = 0;
  double split = 0.8;
  std::uint64_t split_seed = 0;
  std::size_t k = 5;
  std::string reg = "r1";
  double lam0 = 0.1;
  double lam1 = 0.1;
  bool nonneg = false;
  std::size_t sparsity_u = 0;
  std::size_t sparsity_z = 0;
  bool l2_in_smooth = false;
  std::string graph;
  double mu0 = 0.0;
  double symmetric = -1.0;
};

struct OptimOpts {
  std::string algo = "cocain";
  int iters = 1000;
  std::uint64_t seed = 1;
  double lam = 0.99;
  double beta = 0.2;
  double delta = 0.99;
  double eps = 1e-4;
  double lbar0 = 1.0 / 128.0;
  double nu = 2.0;
  double init_lo = 0.0;
  double init_hi = 0.1;
  double stop_tol = 0.0;
};

struct LoadedProblem {
  ProblemSpec spec;
  std::optional<MaskedMatrix> test;
  std::optional<IdMap> ids;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_problem_options(CLI::App* app, ProblemOpts& o) {
  app->add_option("--data", o.data, "synthetic:MxN, csv:PATH or movielens:PATH")->required();
  app->add_option("--ml-format", o.ml_format, "MovieLens release")
      ->check(CLI::IsMember({"ml100k", "ml1m", "ml10m"}));
  app->add_option("--data-seed", o.data_seed, "Seed of the synthetic data generator");
  app->add_option("--split", o.split, "Training fraction of the MovieLens ratings");
  app->add_option("--split-seed", o.split_seed, "Seed of the train/test split");
  app->add_option("--k", o.k, "Factorization rank")->check(CLI::PositiveNumber);
  app->add_option("--reg", o.reg, "Regularizer on both factors")
      ->check(CLI::IsMember({"r1", "r2", "r3", "none", "l2", "l1", "nuclear", "sparsity"}));
  app->add_option("--lam0", o.lam0, "L2 weight")->check(CLI::NonNegativeNumber);
  app->add_option("--lam1", o.lam1, "L1 or nuclear norm weight")->check(CLI::NonNegativeNumber);
  app->add_flag("--nonneg", o.nonneg, "Constrain both factors to be nonnegative");
  app->add_option("--sparsity-u", o.sparsity_u, "Nonzero budget of U for --reg sparsity");
  app->add_option("--sparsity-z", o.sparsity_z, "Nonzero budget of Z for --reg sparsity");
  app->add_flag("--l2-in-smooth", o.l2_in_smooth, "Treat the L2 terms as part of the smooth part");
  app->add_option("--graph", o.graph, "CSV Laplacian (MxM) for the graph term");
  app->add_option("--mu0", o.mu0, "Graph term weight")->check(CLI::NonNegativeNumber);
  app->add_option("--symmetric", o.symmetric, "Symmetric coupling weight lam0 (square data)");
}

void add_optim_options(CLI::App* app, OptimOpts& o) {
  app->add_option("--iters", o.iters, "Iteration budget")->check(CLI::PositiveNumber);
  app->add_option("--lam", o.lam, "BPG-MF step size");
  app->add_option("--beta", o.beta, "iPALM inertia");
  app->add_option("--delta", o.delta, "CoCaIn delta");
  app->add_option("--eps", o.eps, "CoCaIn epsilon");
  app->add_option("--lbar0", o.lbar0, "CoCaIn initial upper constant");
  app->add_option("--nu", o.nu, "CoCaIn backtracking factor");
  app->add_option("--init-lo", o.init_lo, "Lower end of the uniform initialization");
  app->add_option("--init-hi", o.init_hi, "Upper end of the uniform initialization");
  app->add_option("--stop-tol", o.stop_tol, "Stop when |x+ - x| / step falls below this (0 = never)");
}

std::pair<std::size_t, std::size_t> parse_shape(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("");
    std::size_t a = 0, b = 0;
    const long long m = std::stoll(s.substr(0, x), &a);
    const long long n = std::stoll(s.substr(x + 1), &b);
    if (a != x || b != s.size() - x - 1 || m < 1 || n < 1) throw std::invalid_argument("");
    return {static_cast<std::size_t>(m), static_cast<std::size_t>(n)};
  } catch (const std::exception&) {
    throw UsageError("--data synthetic:MxN expects positive integers, got '" + s + "'");
  }
}

BlockReg make_reg(const ProblemOpts& o, bool u_block) {
  BlockReg r;
  r.nonneg = o.nonneg;
  if (o.reg == "r2" || o.reg == "l2") r.l2 = o.lam0;
  if (o.reg == "r3" || o.reg == "l1") r.l1 = o.lam1;
  if (o.reg == "nuclear") r.nuclear = o.lam1;
  if (o.reg == "sparsity") {
    const std::size_t s = u_block ? o.sparsity_u : o.sparsity_z;
    if (s < 1) throw UsageError("--reg sparsity needs --sparsity-u and --sparsity-z >= 1");
    r.sparsity = s;
  }
  return r;
}

LoadedProblem load_problem(const ProblemOpts& o) {
  const auto colon = o.data.find(':');
  if (colon == std::string::npos) throw UsageError("--data must look like synthetic:MxN, csv:PATH or movielens:PATH");
  const std::string kind = o.data.substr(0, colon), arg = o.data.substr(colon + 1);
  LoadedProblem out;
  const BlockReg ru = make_reg(o, true), rz = make_reg(o, false);
  if (kind == "movielens") {
    if (!o.graph.empty() || o.symmetric >= 0.0) throw UsageError("--graph and --symmetric need dense data");
    MovieLensData ml = load_movielens(arg, parse_movielens_format(o.ml_format));
    RatingDataset ds = split_train_test(ml.ratings, o.split, o.split_seed);
    out.spec = make_problem(MaskedData{std::move(ds.train)}, o.k, ru, rz, o.l2_in_smooth);
    out.test = std::move(ds.test);
    out.ids = std::move(ml.ids);
    return out;
  }
  DenseMatrix a;
  if (kind == "synthetic") {
    const auto [m, n] = parse_shape(arg);
    a = synthetic_dense(m, n, o.data_seed);
  } else if (kind == "csv") {
    a = read_dense_csv(arg);
  } else {
    throw UsageError("unknown data source '" + kind + "' (expected synthetic, csv or movielens)");
  }
  if (!o.graph.empty() && o.symmetric >= 0.0) throw UsageError("--graph and --symmetric are mutually exclusive");
  if (!o.graph.empty()) {
    out.spec = make_problem(GraphData{std::move(a), read_dense_csv(o.graph), o.mu0}, o.k, ru, rz, o.l2_in_smooth);
  } else if (o.symmetric >= 0.0) {
    out.spec = make_problem(SymData{std::move(a), o.symmetric}, o.k, ru, rz, o.l2_in_smooth);
  } else {
    out.spec = make_problem(FullData{std::move(a)}, o.k, ru, rz, o.l2_in_smooth);
  }
  return out;
}

Trace run_algo(const LoadedProblem& lp, const OptimOpts& o, bool timing) {
  RunHooks hooks;
  hooks.timing = timing;
  if (lp.test) {
    const MaskedMatrix* test = &*lp.test;
    hooks.test_metric = [test](const FactorPair& x) { return test_rmse(x, *test); };
  }
  BpgConfig base;
  base.lam = o.lam;
  base.max_iters = o.iters;
  base.seed = o.seed;
  base.init_lo = o.init_lo;
  base.init_hi = o.init_hi;
  base.stop_tol = o.stop_tol;
  if (o.algo == "bpg") return run_bpg(lp.spec, base, hooks);
  if (o.algo == "cocain" || o.algo == "bpg-wb") {
    CoCaInConfig c;
    c.base = base;
    c.delta = o.delta;
    c.eps = o.eps;
    c.lbar0 = o.lbar0;
    c.lbar_min = std::min(c.lbar_min, o.lbar0);
    c.nu = o.nu;
    return o.algo == "cocain" ? run_cocain(lp.spec, c, hooks) : run_bpg_wb(lp.spec, c, hooks);
  }
  PalmConfig pc;
  pc.base = base;
  pc.beta = o.beta;
  if (o.algo == "palm") return run_palm(lp.spec, pc, hooks);
  if (o.algo == "ipalm") return run_ipalm(lp.spec, pc, hooks);
  throw UsageError("unknown algorithm '" + o.algo + "'");
}

// Config file lines "key=value" become "--key value" placed ahead of the
// command line flags, so the flags win under the take-last policy.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::vector<std::string> extra;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (value == "true") {
      extra.push_back("--" + key);
    } else if (value != "false") {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  // args[0] is the subcommand
  if (args.empty()) return extra;
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

std::string summary_line(const CheckReport& r) {
  std::ostringstream o;
  o << (r.passed ? "PASS " : "FAIL ") << r.name << " samples=" << r.samples
    << " worst=" << format_real(r.worst_violation) << " tol=" << format_real(r.tolerance);
  if (!r.details.empty()) o << " (" << r.details << ")";
  return o.str();
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bregman proximal gradient matrix factorization"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  // run
  ProblemOpts prob;
  OptimOpts opt;
  std::string out_path, svg_path, factors_prefix;
  bool timing = false;
  auto* run = app.add_subcommand("run", "Run one optimizer and write its trace CSV");
  add_problem_options(run, prob);
  add_optim_options(run, opt);
  run->add_option("--algo", opt.algo, "Optimizer")->check(CLI::IsMember({"bpg", "bpg-wb", "cocain", "palm", "ipalm"}));
  run->add_option("--seed", opt.seed, "Initialization seed");
  run->add_option("--out", out_path, "Trace CSV path")->required();
  run->add_option("--svg", svg_path, "Also plot the objective to this SVG");
  run->add_option("--factors", factors_prefix, "Write the final factors to PREFIX.U.csv and PREFIX.Z.csv");
  run->add_flag("--timing", timing, "Fill the elapsed_sec column (makes the trace run dependent)");

  // stats
  ProblemOpts sprob;
  OptimOpts sopt;
  std::string algos = "bpg,bpg-wb,cocain,palm,ipalm", stats_out, stats_summary;
  std::size_t seeds = 50, jobs = 1;
  std::uint64_t first_seed = 1;
  auto* stats = app.add_subcommand("stats", "Final objectives of several optimizers over many seeds");
  add_problem_options(stats, sprob);
  add_optim_options(stats, sopt);
  stats->add_option("--algos", algos, "Comma separated optimizers");
  stats->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
  stats->add_option("--first-seed", first_seed, "First seed");
  stats->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  stats->add_option("--out", stats_out, "Per-seed CSV path")->required();
  stats->add_option("--summary", stats_summary, "Quantile summary CSV path (default: OUT with .summary.csv)");

  // verify
  std::string suite, verify_out;
  std::size_t vn = 100;
  std::uint64_t vseed = 7;
  auto* verify = app.add_subcommand("verify", "Run a randomized verification suite");
  std::vector<std::string> names = suite_names();
  verify->add_option("--suite", suite, "Suite name")->required()->check(CLI::IsMember(names));
  verify->add_option("--n", vn, "Samples per check")->check(CLI::PositiveNumber);
  verify->add_option("--seed", vseed, "Seed");
  verify->add_option("--out", verify_out, "CSV report path");

  // plot
  std::vector<std::string> traces, labels;
  std::string px = "iter", py = "objective", plot_out;
  auto* plot = app.add_subcommand("plot", "Plot traces to SVG");
  plot->add_option("traces", traces, "Trace CSV files")->required()->check(CLI::ExistingFile);
  plot->add_option("--label", labels, "Legend labels, one per trace")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  plot->add_option("--x", px, "x axis")->check(CLI::IsMember({"iter", "time"}));
  plot->add_option("--y", py, "y axis")->check(CLI::IsMember({"objective", "gap", "test_rmse"}));
  plot->add_option("--out", plot_out, "SVG path")->required();

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    std::vector<std::string> fwd(args.rbegin(), args.rend());
    fwd = expand_config(fwd);
    args.assign(fwd.rbegin(), fwd.rend());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (run->parsed()) {
      LoadedProblem lp = load_problem(prob);
      Trace tr = run_algo(lp, opt, timing);
      for (const auto& w : tr.warnings) std::cerr << "warning: " << w << '\n';
      atomic_write(out_path, trace_csv(tr));
      if (lp.ids) {
        std::ostringstream ids;
        write_id_map(ids, *lp.ids);
        atomic_write(std::filesystem::path(out_path).replace_extension(".ids.csv").string(), ids.str());
      }
      if (!factors_prefix.empty()) {
        std::ostringstream u, z;
        write_dense_csv(u, tr.final_x.u);
        write_dense_csv(z, tr.final_x.z);
        atomic_write(factors_prefix + ".U.csv", u.str());
        atomic_write(factors_prefix + ".Z.csv", z.str());
      }
      if (!svg_path.empty()) {
        auto series = build_series({tr.records}, {opt.algo}, PlotX::iter, PlotY::objective);
        atomic_write(svg_path, render_svg(series, true, "iteration", "objective"));
      }
      const auto& last = tr.records.back();
      std::cout << opt.algo << ": " << tr.records.size() << " iterations, final objective "
                << format_real(last.objective);
      if (last.test_rmse) std::cout << ", test RMSE " << format_real(*last.test_rmse);
      std::cout << '\n';
      return 0;
    }

    if (stats->parsed()) {
      const std::vector<std::string> list = split_list(algos);
      for (const auto& a : list) {
        if (a != "bpg" && a != "bpg-wb" && a != "cocain" && a != "palm" && a != "ipalm")
          throw UsageError("--algos: unknown optimizer '" + a + "'");
      }
      const LoadedProblem lp = load_problem(sprob);
      const std::size_t total = seeds * list.size();
      std::vector<double> finals(total);
      std::vector<std::string> errors(total);
      std::mutex mu;
      std::size_t next = 0;
      auto worker = [&] {
        for (;;) {
          std::size_t job = 0;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next == total) return;
            job = next++;
          }
          OptimOpts o = sopt;
          o.algo = list[job % list.size()];
          o.seed = first_seed + job / list.size();
          try {
            finals[job] = run_algo(lp, o, false).records.back().objective;
          } catch (const std::exception& e) {
            errors[job] = e.what();
          }
        }
      };
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < std::min(jobs, total); ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      for (std::size_t j = 0; j < total; ++j) {
        if (!errors[j].empty()) throw std::runtime_error(list[j % list.size()] + ": " + errors[j]);
      }
      std::ostringstream per, sum;
      per << "algo,seed,final_objective\n";
      for (std::size_t s = 0; s < seeds; ++s)
        for (std::size_t a = 0; a < list.size(); ++a)
          per << list[a] << ',' << first_seed + s << ',' << format_real(finals[s * list.size() + a]) << '\n';
      sum << "algo,min,q25,median,q75,max,mean\n";
      for (std::size_t a = 0; a < list.size(); ++a) {
        std::vector<double> v;
        for (std::size_t s = 0; s < seeds; ++s) v.push_back(finals[s * list.size() + a]);
        double mean = 0.0;
        for (double x : v) mean += x / static_cast<double>(v.size());
        sum << list[a];
        for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) sum << ',' << format_real(quantile(v, q));
        sum << ',' << format_real(mean) << '\n';
      }
      atomic_write(stats_out, per.str());
      if (stats_summary.empty())
        stats_summary = std::filesystem::path(stats_out).replace_extension(".summary.csv").string();
      atomic_write(stats_summary, sum.str());
      std::cout << sum.str();
      return 0;
    }

    if (verify->parsed()) {
      const std::vector<CheckReport> reports = run_suite(suite, vn, vseed);
      bool ok = true;
      std::ostringstream csv;
      csv << "name,samples,worst_violation,tolerance,passed\n";
      for (const auto& r : reports) {
        std::cout << summary_line(r) << '\n';
        csv << r.name << ',' << r.samples << ',' << format_real(r.worst_violation) << ','
            << format_real(r.tolerance) << ',' << (r.passed ? 1 : 0) << '\n';
        ok = ok && r.passed;
      }
      if (!verify_out.empty()) atomic_write(verify_out, csv.str());
      return ok ? 0 : 1;
    }

    if (plot->parsed()) {
      if (!labels.empty() && labels.size() != traces.size())
        throw UsageError("--label must be given once per trace");
      std::vector<std::vector<TraceRecord>> data;
      for (const auto& t : traces) data.push_back(read_trace_csv(t));
      if (labels.empty()) {
        for (const auto& t : traces) labels.push_back(std::filesystem::path(t).stem().string());
      }
      const PlotX xs = parse_plot_x(px);
      const PlotY ys = parse_plot_y(py);
      const auto series = build_series(data, labels, xs, ys);
      const std::string xt = xs == PlotX::iter ? "iteration" : "time (s)";
      const std::string yt = py == "gap" ? "objective - least objective + 1e-2" : py;
      atomic_write(plot_out, render_svg(series, ys != PlotY::test_rmse, xt, yt));
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
