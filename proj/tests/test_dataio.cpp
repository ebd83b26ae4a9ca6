#include "kdm/dataio.hpp"
#include "kdm/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

using namespace kdm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("kdm_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    std::ofstream(path / name) << content;
    return (path / name).string();
  }
};

TcepPair numbered_pair(Index n) {
  TcepPair p;
  p.id = "0001";
  p.data.x.resize(n, 1);
  p.data.y.resize(n, 1);
  for (Index i = 0; i < n; ++i) {
    p.data.x(i, 0) = static_cast<double>(i);
    p.data.y(i, 0) = static_cast<double>(i) * 10.0;
  }
  return p;
}

}  // namespace

TEST_SUITE("dataio") {
  TEST_CASE("matrix loading") {
    TempDir t("matrix");
    const std::string ok = t.file("ok.txt", "# header\n1 2\n\n3\t4e-1\n");
    const Matrix m = load_matrix(ok);
    REQUIRE(m.rows() == 2);
    CHECK(m(1, 1) == 0.4);

    const std::string bad = t.file("bad.txt", "1 2\n3 x\n");
    try {
      load_matrix(bad);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("bad.txt:2") != std::string::npos);
    }
    CHECK_THROWS_AS(load_matrix(t.file("ragged.txt", "1 2\n3\n")), IoError);
    CHECK_THROWS_AS(load_matrix(t.file("empty.txt", "# nothing\n")), IoError);
    CHECK_THROWS_AS(load_matrix((t.path / "missing.txt").string()), IoError);
  }

  TEST_CASE("tcep: empty and malformed directories") {
    TempDir t("tcep_empty");
    CHECK_THROWS_AS(load_tcep(t.path.string()), InputError);
    CHECK_THROWS_AS(load_tcep((t.path / "nope").string()), InputError);
    t.file("pairmeta.txt", "# only comments\n");
    CHECK_THROWS_AS(load_tcep(t.path.string()), InputError);
    t.file("pairmeta.txt", "0001 1 1\n");
    CHECK_THROWS_AS(load_tcep(t.path.string()), IoError);
    t.file("pairmeta.txt", "0001 1 1 2 2 1\n");
    CHECK_THROWS_AS(load_tcep(t.path.string()), IoError);  // data file missing
  }

  TEST_CASE("tcep: column mapping, orientation and exclusion") {
    TempDir t("tcep_map");
    t.file("pair0001.txt", "1 10\n2 20\n3 30\n");
    t.file("pair0002.txt", "5 50\n6 60\n7 70\n8 80\n");  // cause is column 2
    t.file("pair0003.txt", "1 2 3\n4 5 6\n");            // multivariate
    t.file("pairmeta.txt", "0001 1 1 2 2 1\n0002 2 2 1 1 0.5\n0003 1 2 3 3 1\n");
    TcepLoadReport rep;
    const auto pairs = load_tcep(t.path.string(), &rep);
    REQUIRE(pairs.size() == 2);
    CHECK(rep.listed == 3);
    CHECK(rep.loaded == 2);
    CHECK(rep.one_based);
    CHECK(rep.excluded_multivariate == std::vector<std::string>{"0003"});
    CHECK(pairs[0].id == "0001");
    CHECK(pairs[0].data.x(2, 0) == 3.0);
    CHECK(pairs[0].data.y(2, 0) == 30.0);
    CHECK(pairs[1].data.x(0, 0) == 50.0);  // cause-first
    CHECK(pairs[1].data.y(3, 0) == 8.0);   // sample order kept
    CHECK(pairs[1].weight == 0.5);
    CHECK(pairs[1].data.truth == Direction::XtoY);
  }

  TEST_CASE("tcep: zero-based metadata is detected") {
    TempDir t("tcep_zero");
    t.file("pair0001.txt", "1 10\n2 20\n");
    t.file("pairmeta.txt", "0001 0 0 1 1 1\n");
    TcepLoadReport rep;
    const auto pairs = load_tcep(t.path.string(), &rep);
    CHECK_FALSE(rep.one_based);
    CHECK(pairs[0].data.y(1, 0) == 20.0);
  }

  TEST_CASE("tcep: a bad row names file and line") {
    TempDir t("tcep_bad");
    t.file("pair0001.txt", "1 10\n2 oops\n");
    t.file("pairmeta.txt", "0001 1 1 2 2 1\n");
    try {
      load_tcep(t.path.string());
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("pair0001.txt:2") != std::string::npos);
    }
  }

  TEST_CASE("tcep: full benchmark") {
    const char* dir = std::getenv("KDM_TCEP_DIR");
#ifdef KDM_TCEP_DEFAULT
    if (!dir || !*dir) dir = KDM_TCEP_DEFAULT;
#endif
    if (!dir || !*dir || !fs::exists(fs::path(dir) / "pairmeta.txt")) {
      MESSAGE("KDM_TCEP_DIR not set; skipping the full-benchmark count");
      return;
    }
    TcepLoadReport rep;
    const auto pairs = load_tcep(dir, &rep);
    CHECK(pairs.size() >= 95);
    CHECK(pairs.size() <= 112);
    for (const auto& p : pairs) {
      CHECK(p.data.x.cols() == 1);
      CHECK(p.data.y.cols() == 1);
    }
  }

  TEST_CASE("downsample") {
    const TcepPair small = numbered_pair(100);
    CHECK(downsample(small, 400, 1).data.x == small.data.x);

    const TcepPair big = numbered_pair(16382);
    const TcepPair a = downsample(big, 400, 9);
    const TcepPair b = downsample(big, 400, 9);
    const TcepPair c = downsample(big, 400, 10);
    CHECK(a.data.size() == 400);
    CHECK(a.data.x == b.data.x);
    CHECK(a.data.x != c.data.x);
    CHECK_THROWS_AS(downsample(big, 1, 0), InputError);
  }

  TEST_CASE("property: downsample keeps whole rows from the input") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
      TcepPair p = numbered_pair(50 + static_cast<Index>(rng.below(200)));
      for (Index i = 0; i < p.data.size(); ++i) p.data.x(i, 0) = std::floor(rng.uniform() * 20);
      const Index cap = 2 + static_cast<Index>(rng.below(80));
      const TcepPair d = downsample(p, cap, rng.next());
      CHECK(d.data.size() == std::min(cap, p.data.size()));
      // rows stay aligned and form a sub-multiset of the input rows
      std::map<std::pair<double, double>, int> have;
      for (Index i = 0; i < p.data.size(); ++i) ++have[{p.data.x(i, 0), p.data.y(i, 0)}];
      for (Index i = 0; i < d.data.size(); ++i) CHECK(--have[{d.data.x(i, 0), d.data.y(i, 0)}] >= 0);
    }
  }

  TEST_CASE("results files round-trip") {
    TempDir t("results");
    const std::string path = (t.path / "r.tsv").string();

    write_results({}, path);
    CHECK(read_results(path).records.empty());

    ResultRecord r;
    r.id = "ANM-1/N/t0/d3";
    r.method = "KIIM-HT";
    r.cfg_digest = config_digest(ScoreConfig{});
    r.decision = Direction::YtoX;
    r.score_xy = 0.1 + 0.2;
    r.score_yx = -1.0 / 3.0;
    r.wall_time_s = 1e-300;
    r.seed = 0xFFFFFFFFFFFFFFFFULL;
    ResultRecord s = r;
    s.id = "x";
    s.decision = Direction::Undecided;
    s.score_xy = s.score_yx = 5e-324;
    const ConfigHeader header{{"command", "synth"}, {"trials", "1"}};
    write_results({r, s}, path, header);
    const ResultsFile f = read_results(path);
    CHECK(f.header == header);
    REQUIRE(f.records.size() == 2);
    CHECK(f.records[0] == r);
    CHECK(f.records[1] == s);
    CHECK(f.warnings.empty());
  }

  TEST_CASE("results files: forward compatibility and schema errors") {
    TempDir t("results_compat");
    const std::string extra = t.file(
        "extra.tsv",
        "# kdm-results v1\n"
        "id\tmethod\tcfg_digest\tdecision\tscore_xy\tscore_yx\twall_time_s\tseed\tnote\n"
        "p1\tKCDC\tabc\tX->Y\t1\t2\t0\t5\thello\n");
    const ResultsFile f = read_results(extra);
    REQUIRE(f.records.size() == 1);
    CHECK(f.records[0].decision == Direction::XtoY);
    CHECK(f.records[0].seed == 5);
    REQUIRE(f.warnings.size() == 1);
    CHECK(f.warnings[0].find("note") != std::string::npos);

    CHECK_THROWS_AS(read_results(t.file("magic.tsv", "# other v2\nid\n")), IoError);
    CHECK_THROWS_AS(read_results(t.file("nocol.tsv", "# kdm-results v1\nid\tmethod\n")), IoError);
    CHECK_THROWS_AS(read_results((t.path / "missing.tsv").string()), IoError);
  }

  TEST_CASE("config digest") {
    ScoreConfig a;
    const std::string d = config_digest(a);
    CHECK(d.size() == 16);
    CHECK(d == config_digest(ScoreConfig{}));
    a.kernel.reg = 1e-2;
    CHECK(config_digest(a) != d);
    a = ScoreConfig{};
    a.seed = 1;
    CHECK(config_digest(a) != d);
  }

  TEST_CASE("doubles print in shortest round-trip form") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    Rng rng(4);
    for (int t = 0; t < 1000; ++t) {
      const double v = rng.normal() * std::pow(10.0, rng.normal() * 50);
      CHECK(std::stod(format_double(v)) == v);
    }
  }
}
