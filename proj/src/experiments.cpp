#include "kdm/experiments.hpp"

#include "kdm/inference.hpp"
#include "kdm/random.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace kdm {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += fmt(v[i]);
  }
  return out;
}

std::string join_strings(const std::vector<std::string>& v, const char* sep) {
  return join(v, [](const std::string& s) { return s; }, sep);
}

// Tags keep the seed streams of the different protocols apart.
constexpr std::uint64_t kTagScalar = 1;
constexpr std::uint64_t kTagTwoDim = 2;
constexpr std::uint64_t kTagTcep = 3;
constexpr std::uint64_t kTagScore = 7;

}  // namespace

// ---------------------------------------------------------------------------
// methods

ScoreConfig MethodSpec::apply(const ScoreConfig& base) const {
  ScoreConfig c = base;
  c.igci_reference = igci_reference;
  c.kcdc_n_lambda = kcdc_n_lambda;
  if (reweight) {
    ReweightConfig rw = base.reweight.value_or(ReweightConfig{});
    rw.reference = *reweight;
    c.reweight = rw;
  } else if (method != Method::Kiim && method != Method::KiimHt) {
    c.reweight.reset();
  }
  return c;
}

MethodSpec parse_method(const std::string& name) {
  const std::string k = lower(name);
  const auto spec = [](std::string label, Method method) {
    MethodSpec m;
    m.name = std::move(label);
    m.method = method;
    return m;
  };
  MethodSpec m;
  if (k == "kiim-ht") {
    m = spec("KIIM-HT", Method::KiimHt);
  } else if (k == "kcdc") {
    m = spec("KCDC", Method::Kcdc);
  } else if (k == "kcdc-nl") {
    m = spec("KCDC-nL", Method::Kcdc);
    m.kcdc_n_lambda = true;
  } else if (k == "kiim") {
    m = spec("KIIM", Method::Kiim);
  } else if (k == "igci-u" || k == "igci") {
    m = spec("IGCI-U", Method::Igci);
  } else if (k == "igci-n") {
    m = spec("IGCI-N", Method::Igci);
    m.igci_reference = IgciReference::Gaussian;
  } else if (k == "rw-kiim-n" || k == "rw-kiim-l" || k == "rw-kiim-ht-n" || k == "rw-kiim-ht-l") {
    const bool ht = k.find("-ht-") != std::string::npos;
    const bool laplace = k.back() == 'l';
    m.method = ht ? Method::KiimHt : Method::Kiim;
    m.name = std::string(ht ? "Rw-KIIM-HT-" : "Rw-KIIM-") + (laplace ? "L" : "N");
    m.reweight = laplace ? ReferenceDensity::Laplace : ReferenceDensity::Gaussian;
  } else if (k == "anm" || k == "lingam") {
    throw InputError("method '" + name +
                     "' is not implemented here; run it externally and merge its decisions "
                     "with --import-decisions");
  } else {
    throw InputError("unknown method '" + name + "'");
  }
  return m;
}

// ---------------------------------------------------------------------------
// config / tables

ConfigHeader RunConfig::header() const {
  const auto num = [](double v) { return format_double(v); };
  ConfigHeader h;
  h.emplace_back("command", command);
  h.emplace_back("methods", join(methods, [](const MethodSpec& m) { return m.name; }));
  h.emplace_back("trials", std::to_string(trials));
  h.emplace_back("datasets_per_trial", std::to_string(datasets_per_trial));
  h.emplace_back("n", n ? std::to_string(*n) : "default");
  h.emplace_back("seed", std::to_string(seed));
  h.emplace_back("lambda", num(base.kernel.reg));
  h.emplace_back("lambda_reg", num(base.loss.lambda_reg));
  h.emplace_back("rank", std::to_string(base.rank));
  h.emplace_back("hidden", std::to_string(base.hidden));
  h.emplace_back("iters", std::to_string(base.loss.iterations));
  h.emplace_back("learning_rate", num(base.learning_rate));
  h.emplace_back("normalize_pairs", base.loss.normalize_pairs ? "1" : "0");
  h.emplace_back("reweight",
                 !base.reweight ? "none"
                 : base.reweight->reference == ReferenceDensity::Gaussian ? "gaussian"
                                                                          : "laplace");
  h.emplace_back("kcdc_n_lambda", base.kcdc_n_lambda ? "1" : "0");
  h.emplace_back("kiim_rank", base.kiim_rank ? std::to_string(*base.kiim_rank) : "n");
  if (command == "lambda-sweep") h.emplace_back("lambdas", join(lambdas, num));
  if (command == "hypergrid") {
    h.emplace_back("grid_ranks", join(grid_ranks, [](Index r) { return std::to_string(r); }));
    h.emplace_back("grid_lambda_regs", join(grid_lambda_regs, num));
  }
  if (command == "lambda-sweep" || command == "hypergrid") {
    h.emplace_back("suite", suite == Suite::Synth     ? "synth"
                            : suite == Suite::Synth2d ? "synth2d"
                                                      : "both");
  }
  h.emplace_back("settings", settings.empty() ? "all" : join_strings(settings, ","));
  if (command == "tcep") {
    h.emplace_back("tcep_dir", tcep_dir);
    h.emplace_back("cap", std::to_string(cap));
    h.emplace_back("import_decisions", import_decisions.empty() ? "none" : import_decisions);
    h.emplace_back("weighted", weighted ? "1" : "0");
  }
  h.emplace_back("record_timing", record_timing ? "1" : "0");
  return h;
}

std::string Table::to_tsv() const {
  std::ostringstream os;
  os << "# kdm-table v1\n";
  for (const auto& [k, v] : header) os << "# " << k << "=" << v << "\n";
  for (const auto& n : notes) os << "# note: " << n << "\n";
  os << join_strings(columns, "\t") << "\n";
  for (const auto& r : rows) os << join_strings(r, "\t") << "\n";
  return os.str();
}

std::optional<std::string> Table::lookup(const std::vector<std::string>& key,
                                         const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) return std::nullopt;
  const auto col = static_cast<std::size_t>(it - columns.begin());
  for (const auto& r : rows) {
    if (r.size() < key.size() || col >= r.size()) continue;
    if (std::equal(key.begin(), key.end(), r.begin())) return r[col];
  }
  return std::nullopt;
}

std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string setting_key(const Setting& s) {
  return s.label() + "/" + std::string(to_string(s.noise));
}

std::vector<Setting> select_settings(SettingKind kind, const std::vector<std::string>& filter) {
  std::vector<Setting> all = enumerate_settings(kind);
  if (filter.empty()) return all;
  std::vector<Setting> out;
  for (const Setting& s : all) {
    const std::string k = setting_key(s);
    if (std::find(filter.begin(), filter.end(), k) != filter.end()) out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// shared runner

namespace {

struct Outcome {
  Direction decision = Direction::Undecided;
  double score_xy = 0.0;
  double score_yx = 0.0;
  double wall = 0.0;
  std::uint64_t seed = 0;
  std::string error;
  bool ok = false;
};

// One accuracy cell: a fixed score config applied to trials x datasets
// generated from one setting.
struct Cell {
  std::vector<std::string> key;  // leading table columns
  std::string id_prefix;
  const Setting* setting = nullptr;
  std::uint64_t setting_index = 0;
  Index n = 0;
  MethodSpec method;
  ScoreConfig cfg;
};

Outcome run_one(const PairDataset& data, const MethodSpec& m, ScoreConfig cfg,
                std::uint64_t seed) {
  Outcome o;
  o.seed = seed;
  cfg.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const DirectionDecision d = infer_pair(data, m.method, cfg);
    o.decision = d.decision;
    o.score_xy = d.score_xy;
    o.score_yx = d.score_yx;
    o.ok = true;
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  o.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

ResultRecord to_record(const std::string& id, const MethodSpec& m, const std::string& digest,
                       const Outcome& o, bool timing) {
  ResultRecord r;
  r.id = id;
  r.method = m.name;
  r.cfg_digest = digest;
  r.decision = o.ok ? o.decision : Direction::Undecided;
  r.score_xy = o.ok ? o.score_xy : std::nan("");
  r.score_yx = o.ok ? o.score_yx : std::nan("");
  r.wall_time_s = timing ? o.wall : 0.0;
  r.seed = o.seed;
  return r;
}

// Per-trial accuracies (percent) -> mean and population SD. Errored
// datasets are left out of their trial; a trial with nothing left is
// dropped.
CellStats summarize(const std::vector<std::vector<const Outcome*>>& trials,
                    const std::vector<std::vector<double>>* weights = nullptr) {
  CellStats s;
  std::vector<double> acc;
  for (std::size_t t = 0; t < trials.size(); ++t) {
    double good = 0.0, total = 0.0;
    for (std::size_t k = 0; k < trials[t].size(); ++k) {
      const Outcome* o = trials[t][k];
      if (!o->ok) {
        ++s.errors;
        continue;
      }
      const double w = weights ? (*weights)[t][k] : 1.0;
      total += w;
      if (o->decision == Direction::XtoY) good += w;
    }
    if (total > 0.0) acc.push_back(100.0 * good / total);
  }
  s.trials = static_cast<int>(acc.size());
  if (acc.empty()) return s;
  double mean = 0.0;
  for (double a : acc) mean += a;
  mean /= static_cast<double>(acc.size());
  double var = 0.0;
  for (double a : acc) var += (a - mean) * (a - mean);
  s.mean = mean;
  s.sd = std::sqrt(var / static_cast<double>(acc.size()));
  return s;
}

std::vector<std::string> stat_cells(const CellStats& s) {
  if (s.trials == 0) return {"ERR", "ERR", "0", std::to_string(s.errors)};
  return {format_percent(s.mean), format_percent(s.sd), std::to_string(s.trials),
          std::to_string(s.errors)};
}

std::uint64_t data_seed(const RunConfig& rc, const Cell& c, int trial, int k) {
  const std::uint64_t tag =
      c.setting->kind == SettingKind::Scalar ? kTagScalar : kTagTwoDim;
  return derive_seed(rc.seed, {tag, c.setting_index, static_cast<std::uint64_t>(c.n),
                               static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(k)});
}

std::uint64_t setting_index(const Setting& s) {
  const auto all = enumerate_settings(s.kind);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (setting_key(all[i]) == setting_key(s)) return i;
  }
  return 0;
}

// Runs every cell, appends one row per cell (key columns + stats) and all
// records to `table`. Returns the per-cell stats in cell order.
std::vector<CellStats> run_cells(const RunConfig& rc, const std::vector<Cell>& cells,
                                 Table& table) {
  const int T = rc.trials;
  const int D = rc.datasets_per_trial;
  if (T < 1 || D < 1) throw InputError("trials and datasets-per-trial must be positive");
  const std::size_t per_cell = static_cast<std::size_t>(T) * static_cast<std::size_t>(D);
  std::vector<Outcome> out(cells.size() * per_cell);
  const long total = static_cast<long>(out.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (long task = 0; task < total; ++task) {
    const std::size_t ci = static_cast<std::size_t>(task) / per_cell;
    const std::size_t rem = static_cast<std::size_t>(task) % per_cell;
    const int trial = static_cast<int>(rem / static_cast<std::size_t>(D));
    const int k = static_cast<int>(rem % static_cast<std::size_t>(D));
    const Cell& c = cells[ci];
    const std::uint64_t ds = data_seed(rc, c, trial, k);
    Outcome o;
    try {
      const PairDataset data = c.setting->generate(c.n, ds);
      o = run_one(data, c.method, c.cfg, derive_seed(ds, {kTagScore}));
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    out[static_cast<std::size_t>(task)] = std::move(o);
  }

  std::vector<CellStats> stats;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& c = cells[ci];
    const std::string digest = config_digest(c.cfg);
    std::vector<std::vector<const Outcome*>> trials(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
      for (int k = 0; k < D; ++k) {
        const Outcome& o = out[ci * per_cell + static_cast<std::size_t>(t * D + k)];
        trials[static_cast<std::size_t>(t)].push_back(&o);
        const std::string id = c.id_prefix + "/t" + std::to_string(t) + "/d" + std::to_string(k);
        table.records.push_back(to_record(id, c.method, digest, o, rc.record_timing));
        if (!o.ok) table.errors.push_back(id + " " + c.method.name + ": " + o.error);
      }
    }
    const CellStats s = summarize(trials);
    std::vector<std::string> row = c.key;
    for (auto& v : stat_cells(s)) row.push_back(std::move(v));
    table.rows.push_back(std::move(row));
    stats.push_back(s);
  }
  return stats;
}

std::vector<MethodSpec> methods_or(const RunConfig& rc, std::vector<std::string> defaults) {
  if (!rc.methods.empty()) return rc.methods;
  std::vector<MethodSpec> out;
  for (const auto& d : defaults) out.push_back(parse_method(d));
  return out;
}

const std::vector<std::string> kStatColumns{"mean", "sd", "trials", "errors"};

Table synth_table(const RunConfig& rc, SettingKind kind) {
  Table t;
  RunConfig eff = rc;
  eff.methods = methods_or(rc, {"KIIM-HT", "KCDC", "KIIM", "IGCI-N", "IGCI-U"});
  t.header = eff.header();
  t.columns = {"setting", "noise", "method"};
  t.columns.insert(t.columns.end(), kStatColumns.begin(), kStatColumns.end());

  const std::vector<Setting> settings = select_settings(kind, rc.settings);
  if (settings.empty()) throw InputError("no synthetic setting matches the --settings filter");
  std::vector<Cell> cells;
  for (const Setting& s : settings) {
    for (const MethodSpec& m : eff.methods) {
      Cell c;
      c.key = {s.label(), std::string(to_string(s.noise)), m.name};
      c.id_prefix = setting_key(s);
      c.setting = &s;
      c.setting_index = setting_index(s);
      c.n = rc.n_for(kind);
      c.method = m;
      c.cfg = m.apply(rc.base);
      c.cfg.seed = rc.seed;
      cells.push_back(std::move(c));
    }
  }
  run_cells(eff, cells, t);
  return t;
}

std::vector<SettingKind> suite_kinds(Suite s) {
  if (s == Suite::Synth) return {SettingKind::Scalar};
  if (s == Suite::Synth2d) return {SettingKind::TwoDim};
  return {SettingKind::Scalar, SettingKind::TwoDim};
}

}  // namespace

Table run_synth(const RunConfig& cfg) { return synth_table(cfg, SettingKind::Scalar); }
Table run_synth2d(const RunConfig& cfg) { return synth_table(cfg, SettingKind::TwoDim); }

// ---------------------------------------------------------------------------
// lambda sweep

Table run_lambda_sweep(const RunConfig& rc) {
  Table t;
  RunConfig eff = rc;
  eff.methods = methods_or(rc, {"KCDC", "KCDC-nL", "KIIM", "KIIM-HT"});
  if (rc.lambdas.empty()) throw InputError("lambda sweep needs at least one lambda");
  t.header = eff.header();
  t.columns = {"suite", "setting", "noise", "method", "lambda"};
  t.columns.insert(t.columns.end(), kStatColumns.begin(), kStatColumns.end());

  // The 2-D suite is run at its own n and, for KCDC, again at n = 100.
  struct Block {
    std::string suite;
    SettingKind kind;
    Index n;
    bool kcdc_only;
  };
  std::vector<Block> blocks;
  for (SettingKind k : suite_kinds(rc.suite)) {
    if (k == SettingKind::Scalar) {
      blocks.push_back({"synth", k, rc.n_for(k), false});
    } else {
      blocks.push_back({"synth2d", k, rc.n_for(k), false});
      blocks.push_back({"synth2d-n100", k, 100, true});
    }
  }

  std::vector<std::vector<Setting>> settings;
  for (const Block& b : blocks) settings.push_back(select_settings(b.kind, rc.settings));

  std::vector<Cell> cells;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& b = blocks[bi];
    for (const Setting& s : settings[bi]) {
      for (const MethodSpec& m : eff.methods) {
        if (b.kcdc_only && m.method != Method::Kcdc) continue;
        for (double lam : rc.lambdas) {
          Cell c;
          const std::string ls = format_double(lam);
          c.key = {b.suite, s.label(), std::string(to_string(s.noise)), m.name, ls};
          c.id_prefix = b.suite + "/" + setting_key(s) + "/lambda=" + ls;
          c.setting = &s;
          c.setting_index = setting_index(s);
          c.n = b.n;
          c.method = m;
          c.cfg = m.apply(rc.base);
          c.cfg.kernel.reg = lam;
          c.cfg.seed = rc.seed;
          cells.push_back(std::move(c));
        }
      }
    }
  }
  if (cells.empty()) throw InputError("lambda sweep: nothing to run for this selection");
  run_cells(eff, cells, t);
  return t;
}

// ---------------------------------------------------------------------------
// hypergrid

Table run_hypergrid(const RunConfig& rc) {
  Table t;
  RunConfig eff = rc;
  eff.methods = {parse_method("KIIM-HT")};
  if (rc.grid_ranks.empty() || rc.grid_lambda_regs.empty()) {
    throw InputError("hypergrid needs nonempty rank and lambda_reg sets");
  }
  t.header = eff.header();
  t.columns = {"suite", "setting", "noise", "rank", "lambda_reg"};
  t.columns.insert(t.columns.end(), kStatColumns.begin(), kStatColumns.end());

  const MethodSpec m = eff.methods.front();
  std::vector<std::vector<Setting>> settings;
  std::vector<SettingKind> kinds = suite_kinds(rc.suite);
  for (SettingKind k : kinds) settings.push_back(select_settings(k, rc.settings));

  std::vector<Cell> cells;
  for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
    const std::string suite = kinds[ki] == SettingKind::Scalar ? "synth" : "synth2d";
    for (const Setting& s : settings[ki]) {
      for (Index r : rc.grid_ranks) {
        for (double lr : rc.grid_lambda_regs) {
          Cell c;
          const std::string rs = std::to_string(r), ls = format_double(lr);
          c.key = {suite, s.label(), std::string(to_string(s.noise)), rs, ls};
          c.id_prefix = suite + "/" + setting_key(s) + "/rank=" + rs + "/lambda_reg=" + ls;
          c.setting = &s;
          c.setting_index = setting_index(s);
          c.n = rc.n_for(kinds[ki]);
          c.method = m;
          c.cfg = m.apply(rc.base);
          c.cfg.rank = r;
          c.cfg.loss.lambda_reg = lr;
          c.cfg.seed = rc.seed;
          cells.push_back(std::move(c));
        }
      }
    }
  }
  if (cells.empty()) throw InputError("hypergrid: nothing to run for this selection");
  const std::vector<CellStats> stats = run_cells(eff, cells, t);

  // Summary across the grid cells of each setting.
  const std::size_t grid = rc.grid_ranks.size() * rc.grid_lambda_regs.size();
  for (std::size_t first = 0; first < cells.size(); first += grid) {
    std::vector<double> means;
    int errors = 0;
    for (std::size_t i = first; i < first + grid; ++i) {
      if (stats[i].trials > 0) means.push_back(stats[i].mean);
      errors += stats[i].errors;
    }
    std::vector<std::string> row(cells[first].key.begin(), cells[first].key.begin() + 3);
    row.push_back("all");
    row.push_back("all");
    if (means.empty()) {
      row.insert(row.end(), {"ERR", "ERR", "0", std::to_string(errors)});
    } else {
      double mu = 0.0;
      for (double v : means) mu += v;
      mu /= static_cast<double>(means.size());
      double var = 0.0;
      for (double v : means) var += (v - mu) * (v - mu);
      row.push_back(format_percent(mu));
      row.push_back(format_percent(std::sqrt(var / static_cast<double>(means.size()))));
      row.push_back(std::to_string(means.size()));
      row.push_back(std::to_string(errors));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// TCEP

Table run_tcep(const RunConfig& rc) {
  if (rc.tcep_dir.empty()) throw InputError("tcep: no benchmark directory given (--tcep-dir)");
  if (rc.cap < 2) throw InputError("tcep: cap must be at least 2");
  if (rc.trials < 1) throw InputError("trials must be positive");
  Table t;
  RunConfig eff = rc;
  eff.methods = methods_or(rc, {"KIIM-HT", "KCDC", "KIIM", "IGCI-N", "IGCI-U", "Rw-KIIM-N",
                                "Rw-KIIM-L", "Rw-KIIM-HT-N", "Rw-KIIM-HT-L"});
  t.header = eff.header();
  t.columns = {"method", "mean", "sd", "trials", "errors", "pairs"};

  TcepLoadReport report;
  const std::vector<TcepPair> pairs = load_tcep(rc.tcep_dir, &report);
  t.notes.push_back("listed " + std::to_string(report.listed) + " pairs, loaded " +
                    std::to_string(report.loaded) + ", skipped " +
                    std::to_string(report.excluded_multivariate.size()) + " multivariate, " +
                    (report.one_based ? "1-based" : "0-based") + " metadata");
  if (pairs.empty()) throw InputError("tcep: no usable pairs in '" + rc.tcep_dir + "'");

  const std::size_t P = pairs.size();
  const std::size_t T = static_cast<std::size_t>(rc.trials);
  const std::size_t M = eff.methods.size();
  std::vector<Outcome> out(M * T * P);
  const long total = static_cast<long>(out.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (long task = 0; task < total; ++task) {
    const std::size_t mi = static_cast<std::size_t>(task) / (T * P);
    const std::size_t trial = (static_cast<std::size_t>(task) / P) % T;
    const std::size_t pi = static_cast<std::size_t>(task) % P;
    const std::uint64_t ds = derive_seed(rc.seed, {kTagTcep, trial, pi});
    Outcome o;
    try {
      const TcepPair sub = downsample(pairs[pi], rc.cap, ds);
      o = run_one(sub.data, eff.methods[mi], eff.methods[mi].apply(rc.base),
                  derive_seed(ds, {kTagScore}));
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    out[static_cast<std::size_t>(task)] = std::move(o);
  }

  std::vector<std::vector<double>> weights(T);
  for (std::size_t tr = 0; tr < T; ++tr) {
    for (const TcepPair& p : pairs) weights[tr].push_back(p.weight);
  }
  for (std::size_t mi = 0; mi < M; ++mi) {
    const MethodSpec& m = eff.methods[mi];
    ScoreConfig cfg = m.apply(rc.base);
    cfg.seed = rc.seed;
    const std::string digest = config_digest(cfg);
    std::vector<std::vector<const Outcome*>> trials(T);
    for (std::size_t tr = 0; tr < T; ++tr) {
      for (std::size_t pi = 0; pi < P; ++pi) {
        const Outcome& o = out[(mi * T + tr) * P + pi];
        trials[tr].push_back(&o);
        const std::string id = pairs[pi].id + "/t" + std::to_string(tr);
        t.records.push_back(to_record(id, m, digest, o, rc.record_timing));
        if (!o.ok) t.errors.push_back(id + " " + m.name + ": " + o.error);
      }
    }
    const CellStats s = summarize(trials, rc.weighted ? &weights : nullptr);
    std::vector<std::string> row{m.name};
    for (auto& v : stat_cells(s)) row.push_back(std::move(v));
    row.push_back(std::to_string(P));
    t.rows.push_back(std::move(row));
  }

  // Decisions produced elsewhere (ANM, LiNGAM, ...), keyed by pair id with
  // an optional "/t<trial>" suffix.
  if (!rc.import_decisions.empty()) {
    const ResultsFile imported = read_results(rc.import_decisions);
    for (const auto& w : imported.warnings) t.notes.push_back("import: " + w);
    std::map<std::string, std::size_t> index;
    for (std::size_t pi = 0; pi < P; ++pi) index[pairs[pi].id] = pi;
    std::map<std::string, std::map<std::string, std::vector<std::pair<std::size_t, Direction>>>>
        by_method;  // method -> trial tag -> (pair, decision)
    int unmatched = 0;
    for (const ResultRecord& r : imported.records) {
      const auto slash = r.id.find('/');
      const std::string pid = r.id.substr(0, slash);
      const std::string trial = slash == std::string::npos ? "t0" : r.id.substr(slash + 1);
      const auto it = index.find(pid);
      if (it == index.end()) {
        ++unmatched;
        continue;
      }
      by_method[r.method][trial].emplace_back(it->second, r.decision);
    }
    if (unmatched) {
      t.notes.push_back("import: " + std::to_string(unmatched) +
                        " decisions name pairs that were not loaded");
    }
    for (const auto& [name, per_trial] : by_method) {
      std::vector<double> acc;
      for (const auto& [tag, list] : per_trial) {
        double good = 0.0, tot = 0.0;
        for (const auto& [pi, d] : list) {
          const double w = rc.weighted ? pairs[pi].weight : 1.0;
          tot += w;
          if (d == pairs[pi].data.truth) good += w;
        }
        if (tot > 0.0) acc.push_back(100.0 * good / tot);
      }
      double mu = 0.0;
      for (double a : acc) mu += a;
      mu /= static_cast<double>(acc.size());
      double var = 0.0;
      for (double a : acc) var += (a - mu) * (a - mu);
      t.rows.push_back({name + " (imported)", format_percent(mu),
                        format_percent(std::sqrt(var / static_cast<double>(acc.size()))),
                        std::to_string(acc.size()), "0", std::to_string(per_trial.begin()->second.size())});
    }
  }
  return t;
}

}  // namespace kdm
