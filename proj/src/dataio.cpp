#include "kdm/dataio.hpp"

#include "kdm/random.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace kdm {

namespace fs = std::filesystem;

namespace {

constexpr const char* kResultsMagic = "# kdm-results v1";
constexpr std::array<const char*, 8> kResultColumns{
    "id", "method", "cfg_digest", "decision", "score_xy", "score_yx", "wall_time_s", "seed"};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

template <typename Int>
bool parse_int(std::string_view tok, Int& out) {
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + tmp.string() + "' for writing");
    os << content;
    if (!os) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot move results into '" + path + "': " + ec.message());
}

Matrix load_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty() || toks.front().front() == '#') continue;
    if (cols < 0) cols = static_cast<Index>(toks.size());
    if (static_cast<Index>(toks.size()) != cols) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) +
                    " columns, found " + std::to_string(toks.size()));
    }
    for (const auto tok : toks) {
      double v = 0.0;
      if (!parse_double(tok, v)) {
        throw IoError(path + ":" + std::to_string(lineno) + ": cannot parse '" +
                      std::string(tok) + "' as a number");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw IoError("'" + path + "' contains no data rows");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < cols; ++k) m(i, k) = values[static_cast<std::size_t>(i * cols + k)];
  }
  return m;
}

PairDataset load_pair_file(const std::string& path, ColumnRange x_cols, ColumnRange y_cols) {
  const Matrix m = load_matrix(path);
  for (const ColumnRange& r : {x_cols, y_cols}) {
    if (r.first < 0 || r.last < r.first || r.last >= m.cols()) {
      throw InputError("'" + path + "': column range " + std::to_string(r.first + 1) + "-" +
                       std::to_string(r.last + 1) + " outside the " +
                       std::to_string(m.cols()) + " available columns");
    }
  }
  PairDataset d;
  d.x = m.middleCols(x_cols.first, x_cols.width());
  d.y = m.middleCols(y_cols.first, y_cols.width());
  d.truth = Direction::XtoY;
  d.provenance = path;
  d.validate();
  return d;
}

std::vector<TcepPair> load_tcep(const std::string& dir, TcepLoadReport* report) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw InputError("TCEP directory '" + dir + "' does not exist");
  const fs::path meta = root / "pairmeta.txt";
  if (!fs::exists(meta)) {
    throw InputError("TCEP directory '" + dir + "' has no pairmeta.txt");
  }

  struct MetaLine {
    std::string id;
    Index cs, ce, es, ee;
    double weight;
    int lineno;
  };
  std::vector<MetaLine> lines;
  {
    std::ifstream is(meta);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto toks = split_ws(line);
      if (toks.empty() || toks.front().front() == '#') continue;
      MetaLine ml{std::string(toks[0]), 0, 0, 0, 0, 1.0, lineno};
      const bool ok = toks.size() >= 5 && parse_int(toks[1], ml.cs) && parse_int(toks[2], ml.ce) &&
                      parse_int(toks[3], ml.es) && parse_int(toks[4], ml.ee) &&
                      (toks.size() < 6 || parse_double(toks[5], ml.weight));
      if (!ok) {
        throw IoError(meta.string() + ":" + std::to_string(lineno) +
                      ": expected 'id cause-first cause-last effect-first effect-last [weight]'");
      }
      lines.push_back(ml);
    }
  }
  if (lines.empty()) throw InputError("'" + meta.string() + "' lists no pairs");

  bool one_based = true;
  for (const auto& ml : lines) {
    if (ml.cs == 0 || ml.ce == 0 || ml.es == 0 || ml.ee == 0) one_based = false;
  }
  const Index shift = one_based ? 1 : 0;

  TcepLoadReport rep;
  rep.one_based = one_based;
  rep.listed = static_cast<int>(lines.size());
  std::vector<TcepPair> pairs;
  for (const auto& ml : lines) {
    if (ml.ce != ml.cs || ml.ee != ml.es) {
      rep.excluded_multivariate.push_back(ml.id);
      continue;
    }
    fs::path file = root / ("pair" + ml.id + ".txt");
    if (!fs::exists(file)) {
      int numeric = 0;
      if (parse_int(std::string_view(ml.id), numeric)) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "pair%04d.txt", numeric);
        file = root / buf;
      }
    }
    if (!fs::exists(file)) {
      throw IoError(meta.string() + ":" + std::to_string(ml.lineno) + ": data file for pair '" +
                    ml.id + "' not found");
    }
    TcepPair p;
    p.id = ml.id;
    p.weight = ml.weight;
    p.data = load_pair_file(file.string(), {ml.cs - shift, ml.ce - shift},
                            {ml.es - shift, ml.ee - shift});
    pairs.push_back(std::move(p));
  }
  rep.loaded = static_cast<int>(pairs.size());
  if (report) *report = rep;
  return pairs;
}

TcepPair downsample(const TcepPair& pair, Index cap, std::uint64_t seed) {
  if (cap < 2) throw InputError("downsample: cap must be at least 2");
  const Index n = pair.data.size();
  if (n <= cap) return pair;
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  TcepPair out = pair;
  out.data.x.resize(cap, pair.data.x.cols());
  out.data.y.resize(cap, pair.data.y.cols());
  for (Index i = 0; i < cap; ++i) {
    out.data.x.row(i) = pair.data.x.row(perm[static_cast<std::size_t>(i)]);
    out.data.y.row(i) = pair.data.y.row(perm[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::string config_digest(const ScoreConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : cfg.canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_results(const std::vector<ResultRecord>& records, const std::string& path,
                   const ConfigHeader& header) {
  std::ostringstream os;
  os << kResultsMagic << "\n";
  for (const auto& [k, v] : header) os << "# " << k << "=" << v << "\n";
  for (std::size_t c = 0; c < kResultColumns.size(); ++c) {
    os << (c ? "\t" : "") << kResultColumns[c];
  }
  os << "\n";
  for (const auto& r : records) {
    os << r.id << "\t" << r.method << "\t" << r.cfg_digest << "\t" << to_string(r.decision)
       << "\t" << format_double(r.score_xy) << "\t" << format_double(r.score_yx) << "\t"
       << format_double(r.wall_time_s) << "\t" << r.seed << "\n";
  }
  write_file_atomic(path, os.str());
}

ResultsFile read_results(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || strip_cr(line) != kResultsMagic) {
    throw IoError("'" + path + "' is not a kdm-results v1 file");
  }

  ResultsFile out;
  std::map<std::string, std::size_t> col;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        out.header.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      }
      continue;
    }
    const auto fields = split_tabs(line);
    if (col.empty()) {
      for (std::size_t i = 0; i < fields.size(); ++i) col[fields[i]] = i;
      for (const char* name : kResultColumns) {
        if (!col.contains(name)) {
          throw IoError(path + ":" + std::to_string(lineno) + ": missing column '" + name + "'");
        }
      }
      for (const auto& f : fields) {
        const bool known = std::find_if(kResultColumns.begin(), kResultColumns.end(),
                                        [&](const char* c) { return f == c; }) !=
                           kResultColumns.end();
        if (!known) out.warnings.push_back("ignoring unknown column '" + f + "'");
      }
      continue;
    }
    auto field = [&](const char* name) -> const std::string& {
      const std::size_t i = col.at(name);
      if (i >= fields.size()) {
        throw IoError(path + ":" + std::to_string(lineno) + ": row is missing field '" + name + "'");
      }
      return fields[i];
    };
    ResultRecord r;
    r.id = field("id");
    r.method = field("method");
    r.cfg_digest = field("cfg_digest");
    r.decision = direction_from_string(field("decision"));
    const bool ok = parse_double(field("score_xy"), r.score_xy) &&
                    parse_double(field("score_yx"), r.score_yx) &&
                    parse_double(field("wall_time_s"), r.wall_time_s) &&
                    parse_int(std::string_view(field("seed")), r.seed);
    if (!ok) throw IoError(path + ":" + std::to_string(lineno) + ": malformed numeric field");
    out.records.push_back(std::move(r));
  }
  if (col.empty()) throw IoError("'" + path + "' has no column header");
  return out;
}

}  // namespace kdm
