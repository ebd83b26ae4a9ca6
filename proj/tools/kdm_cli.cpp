// kdm: command-line runner for the cause-effect experiments.
//
//   kdm synth        scalar synthetic table
//   kdm synth2d      two-dimensional synthetic table
//   kdm tcep         Tuebingen pairs
//   kdm lambda-sweep kernel ridge sensitivity
//   kdm hypergrid    KIIM-HT rank x lambda_reg grid
//   kdm infer FILE   one pair; exit 0 X->Y, 1 Y->X, 2 undecided, >2 error

#include "kdm/dataio.hpp"
#include "kdm/experiments.hpp"
#include "kdm/inference.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;

namespace {

constexpr int kExitError = 4;
constexpr int kExitPartial = 3;

struct Options {
  std::vector<std::string> methods;
  std::optional<double> lambda;
  std::vector<double> lambdas;  // lambda-sweep only, overrides the default list
  std::optional<double> lambda_reg;
  std::optional<int> rank;
  std::optional<int> hidden;
  std::optional<int> iters;
  std::optional<double> learning_rate;
  std::optional<int> trials;
  std::optional<int> datasets;
  std::optional<int> n;
  std::uint64_t seed = 0;
  std::string reweight = "none";
  std::string tcep_dir;
  std::string out;
  bool desk_scale = false;
  bool kcdc_n_lambda = false;
  bool normalize_pairs = false;
  std::string import_decisions;
  bool weighted = false;
  bool record_timing = false;
  std::vector<std::string> settings;
  std::string suite = "both";
  int cap = 400;
  int threads = 0;
  std::vector<int> grid_ranks;
  std::vector<double> grid_lambda_regs;
  std::optional<int> kiim_rank;

  // infer
  std::string file;
  std::string x_cols = "1";
  std::string y_cols = "2";
};

void add_common(CLI::App* c, Options& o) {
  c->add_option("--method", o.methods, "methods (repeatable or comma-separated)")
      ->delimiter(',');
  c->add_option("--lambda", o.lambda, "kernel ridge lambda (default 1e-3)");
  c->add_option("--lambda-reg", o.lambda_reg, "KIIM-HT regularizer weight (default 1e-3)");
  c->add_option("--rank", o.rank, "KIIM-HT projection rank (default 100)");
  c->add_option("--hidden", o.hidden, "KIIM-HT hidden units (default 20)");
  c->add_option("--iters", o.iters, "Adam iterations (default 100)");
  c->add_option("--lr", o.learning_rate, "Adam learning rate (default 1e-3)");
  c->add_option("--kiim-rank", o.kiim_rank, "KIIM projection rank (default n)");
  c->add_option("--seed", o.seed, "base seed");
  c->add_option("--reweight", o.reweight, "re-weighting for KIIM / KIIM-HT")
      ->check(CLI::IsMember({"none", "gaussian", "laplace"}));
  c->add_flag("--kcdc-n-lambda", o.kcdc_n_lambda, "use n*lambda as the KCDC ridge");
  c->add_flag("--normalize-pairs", o.normalize_pairs, "scale the pair term by 2/(n(n-1))");
  c->add_option("--threads", o.threads, "OpenMP threads (default: runtime choice)");
}

void add_experiment(CLI::App* c, Options& o) {
  c->add_option("--trials", o.trials, "trials (default 5)");
  c->add_option("--datasets-per-trial", o.datasets, "datasets per trial (default 50)");
  c->add_option("--n", o.n, "samples per dataset");
  c->add_option("--out", o.out, "output directory (default $KDM_OUTPUT_DIR or ./results)");
  c->add_flag("--desk-scale", o.desk_scale, "1 trial x 20 datasets");
  c->add_flag("--record-timing", o.record_timing,
              "store wall time per record (breaks byte-identical reruns)");
  c->add_option("--settings", o.settings, "restrict settings, e.g. ANM-1/N")->delimiter(',');
}

kdm::ScoreConfig base_config(const Options& o) {
  kdm::ScoreConfig c;
  if (o.lambda) c.kernel.reg = *o.lambda;
  if (o.lambda_reg) c.loss.lambda_reg = *o.lambda_reg;
  if (o.rank) c.rank = *o.rank;
  if (o.hidden) c.hidden = *o.hidden;
  if (o.iters) c.loss.iterations = *o.iters;
  if (o.learning_rate) c.learning_rate = *o.learning_rate;
  if (o.kiim_rank) c.kiim_rank = *o.kiim_rank;
  c.loss.normalize_pairs = o.normalize_pairs;
  c.kcdc_n_lambda = o.kcdc_n_lambda;
  if (o.reweight != "none") {
    kdm::ReweightConfig rw;
    rw.reference = o.reweight == "gaussian" ? kdm::ReferenceDensity::Gaussian
                                            : kdm::ReferenceDensity::Laplace;
    c.reweight = rw;
  }
  c.seed = o.seed;
  return c;
}

kdm::RunConfig run_config(const std::string& command, const Options& o) {
  kdm::RunConfig rc;
  rc.command = command;
  for (const auto& m : o.methods) rc.methods.push_back(kdm::parse_method(m));
  rc.base = base_config(o);
  if (o.desk_scale) rc.desk_scale();
  if (o.trials) rc.trials = *o.trials;
  if (o.datasets) rc.datasets_per_trial = *o.datasets;
  if (o.n) rc.n = *o.n;
  rc.seed = o.seed;
  if (!o.lambdas.empty()) rc.lambdas = o.lambdas;
  if (!o.grid_ranks.empty()) rc.grid_ranks.assign(o.grid_ranks.begin(), o.grid_ranks.end());
  if (!o.grid_lambda_regs.empty()) rc.grid_lambda_regs = o.grid_lambda_regs;
  rc.suite = o.suite == "synth" ? kdm::Suite::Synth
             : o.suite == "synth2d" ? kdm::Suite::Synth2d
                                    : kdm::Suite::Both;
  rc.settings = o.settings;
  rc.tcep_dir = o.tcep_dir;
  rc.cap = o.cap;
  rc.import_decisions = o.import_decisions;
  rc.weighted = o.weighted;
  rc.record_timing = o.record_timing;
  return rc;
}

std::string output_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("KDM_OUTPUT_DIR"); env && *env) return env;
  return "results";
}

int emit(const std::string& command, const kdm::Table& t,
         const Options& o) {
  const std::string tsv = t.to_tsv();
  std::cout << tsv;
  const fs::path dir = output_dir(o);
  fs::create_directories(dir);
  const fs::path table = dir / (command + ".tsv");
  const fs::path records = dir / (command + ".records.tsv");
  kdm::write_file_atomic(table.string(), tsv);
  kdm::write_results(t.records, records.string(), t.header);
  std::cerr << "wrote " << table.string() << " and " << records.string() << "\n";
  if (!t.errors.empty()) {
    std::cerr << t.errors.size() << " task(s) failed:\n";
    for (const auto& e : t.errors) std::cerr << "  " << e << "\n";
    return kExitPartial;
  }
  return 0;
}

kdm::ColumnRange parse_range(const std::string& s) {
  // 1-based "3" or "3-4" on the command line, 0-based inside.
  const auto dash = s.find('-');
  try {
    const long a = std::stol(s.substr(0, dash));
    const long b = dash == std::string::npos ? a : std::stol(s.substr(dash + 1));
    if (a < 1 || b < a) throw std::invalid_argument(s);
    return {a - 1, b - 1};
  } catch (const std::exception&) {
    throw kdm::InputError("bad column range '" + s + "' (expected e.g. 1 or 1-2)");
  }
}

int run_infer(const Options& o) {
  kdm::MethodSpec m =
      o.methods.empty() ? kdm::parse_method("KIIM-HT") : kdm::parse_method(o.methods.front());
  const kdm::PairDataset d = kdm::load_pair_file(o.file, parse_range(o.x_cols), parse_range(o.y_cols));
  const kdm::ScoreConfig cfg = m.apply(base_config(o));
  const kdm::DirectionDecision r = kdm::infer_pair(d, m.method, cfg);
  std::cout << "decision\t" << kdm::to_string(r.decision) << "\n"
            << "score_xy\t" << kdm::format_double(r.score_xy) << "\n"
            << "score_yx\t" << kdm::format_double(r.score_yx) << "\n"
            << "method\t" << m.name << "\n"
            << "cfg_digest\t" << kdm::config_digest(cfg) << "\n";
  switch (r.decision) {
    case kdm::Direction::XtoY:
      return 0;
    case kdm::Direction::YtoX:
      return 1;
    case kdm::Direction::Undecided:
      return 2;
  }
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel deviance measures for cause-effect discovery"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "scalar synthetic settings");
  auto* synth2d = app.add_subcommand("synth2d", "two-dimensional synthetic settings");
  auto* tcep = app.add_subcommand("tcep", "Tuebingen cause-effect pairs");
  auto* sweep = app.add_subcommand("lambda-sweep", "accuracy across kernel ridge lambdas");
  auto* grid = app.add_subcommand("hypergrid", "KIIM-HT over rank x lambda_reg");
  auto* infer = app.add_subcommand("infer", "decide the direction of one pair file");

  for (auto* c : {synth, synth2d, tcep, sweep, grid, infer}) add_common(c, o);
  for (auto* c : {synth, synth2d, tcep, sweep, grid}) add_experiment(c, o);

  tcep->add_option("--tcep-dir", o.tcep_dir, "benchmark directory (pairmeta.txt + pairNNNN.txt)")
      ->required();
  tcep->add_option("--cap", o.cap, "downsampling cap per pair (default 400)");
  tcep->add_option("--import-decisions", o.import_decisions,
                   "results file with decisions of external methods");
  tcep->add_flag("--weighted", o.weighted, "weight accuracy by the metadata pair weights");

  sweep->add_option("--lambdas", o.lambdas, "lambda list")->delimiter(',');
  for (auto* c : {sweep, grid}) {
    c->add_option("--suite", o.suite, "synth, synth2d or both")
        ->check(CLI::IsMember({"synth", "synth2d", "both"}));
  }
  grid->add_option("--ranks", o.grid_ranks, "rank set")->delimiter(',');
  grid->add_option("--lambda-regs", o.grid_lambda_regs, "lambda_reg set")->delimiter(',');

  infer->add_option("file", o.file, "whitespace-separated pair file")->required();
  infer->add_option("--x-cols", o.x_cols, "1-based cause columns, e.g. 1 or 1-2");
  infer->add_option("--y-cols", o.y_cols, "1-based effect columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

#ifdef _OPENMP
  if (o.threads > 0) omp_set_num_threads(o.threads);
#endif

  try {
    if (infer->parsed()) return run_infer(o);
    std::string command;
    kdm::Table (*runner)(const kdm::RunConfig&) = nullptr;
    if (synth->parsed()) {
      command = "synth";
      runner = kdm::run_synth;
    } else if (synth2d->parsed()) {
      command = "synth2d";
      runner = kdm::run_synth2d;
    } else if (tcep->parsed()) {
      command = "tcep";
      runner = kdm::run_tcep;
    } else if (sweep->parsed()) {
      command = "lambda-sweep";
      runner = kdm::run_lambda_sweep;
    } else {
      command = "hypergrid";
      runner = kdm::run_hypergrid;
    }
    const kdm::RunConfig rc = run_config(command, o);
    const kdm::Table t = runner(rc);
    return emit(command, t, o);
  } catch (const std::exception& e) {
    std::cerr << "kdm: " << e.what() << "\n";
    return kExitError;
  }
}
