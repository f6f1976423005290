// Drives the installed binary as a subprocess. These tests check plumbing
// only: exit codes, created files, output shape. Numeric behavior lives in
// the library tests.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "lqot/kg.hpp"
#include "lqot/query.hpp"

using namespace lqot;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "lqot_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run(const std::string& args) {
  static int counter = 0;
  fs::path out = work_dir() / ("stdout." + std::to_string(counter));
  fs::path err = work_dir() / ("stderr." + std::to_string(counter));
  ++counter;
  std::string cmd = std::string(LQOT_BINARY) + " " + args + " >" + out.string() + " 2>" +
                    err.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// Small graph with cycles and shared targets so every shape can be sampled.
fs::path graph_path() {
  static fs::path p = [] {
    fs::path path = work_dir() / "g.tsv";
    std::ofstream out(path, std::ios::binary);
    out << "a\tlikes\tb\nb\tlikes\tc\nc\tlikes\td\nd\tlikes\te\ne\tlikes\ta\n"
        << "a\tknows\tc\nb\tknows\tc\nc\tknows\te\nd\tknows\ta\ne\tknows\tb\n"
        << "f\tlikes\tc\nf\tknows\tb\ng\tlikes\tf\nh\tknows\tg\ng\tknows\th\nh\tlikes\ta\n";
    return path;
  }();
  return p;
}

}  // namespace

TEST_CASE("help and usage errors") {
  RunResult help = run("--help");
  CHECK(help.code == 0);
  for (const char* cmd : {"split", "train", "build-adj", "gen-queries", "query", "eval"})
    CHECK(help.out.find(cmd) != std::string::npos);

  CHECK(run("").code == 1);             // a subcommand is required
  CHECK(run("frobnicate").code == 1);   // unknown subcommand
  CHECK(run("split --kg g.tsv").code == 1);  // missing required --out
  CHECK(run("query --kg g --adj a --q x --evaluate sometimes").code == 1);
}

TEST_CASE("runtime failures exit 2 with a message") {
  RunResult r = run("split --kg " + (work_dir() / "nope.tsv").string() + " --out " +
                    (work_dir() / "t.tsv").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("split writes both partitions and reports the counts") {
  fs::path train = work_dir() / "train.tsv";
  fs::path removed = work_dir() / "removed.tsv";
  RunResult r = run("split --kg " + graph_path().string() + " --keep 0.5 --seed 7 --out " +
                    train.string() + " --removed " + removed.string());
  CHECK(r.code == 0);
  CHECK(r.err.find("lqot split | theta=0.5") != std::string::npos);
  CHECK(r.err.find("kept 8 of 16") != std::string::npos);
  KnowledgeGraph kept = load_triples(train.string());
  CHECK(kept.triples().size() == 8);
  KnowledgeGraph gone = load_triples(removed.string());
  CHECK(gone.triples().size() == 8);
}

TEST_CASE("train, build-adj, query round-trip") {
  fs::path model = work_dir() / "model.bin";
  RunResult t = run("train --kg " + graph_path().string() +
                    " --dim 4 --epochs 3 --batch 8 --out " + model.string());
  CHECK(t.code == 0);
  CHECK(t.err.find("lqot train | ") != std::string::npos);
  CHECK(t.err.find("dim=4 epochs=3") != std::string::npos);
  CHECK(t.err.find("final epoch loss") != std::string::npos);
  CHECK(fs::exists(model));

  fs::path adj = work_dir() / "adj";
  RunResult b = run("build-adj --kg " + graph_path().string() + " --model " + model.string() +
                    " --out " + adj.string() + " --top-k 5");
  CHECK(b.code == 0);
  CHECK(fs::exists(adj / "r0.adj"));
  CHECK(fs::exists(adj / "r1.adj"));

  RunResult q = run("query --kg " + graph_path().string() + " --adj " + adj.string() +
                    " --q '(p likes \"a\")' --top 3");
  CHECK(q.code == 0);
  CHECK(q.err.find("lqot query | ") != std::string::npos);
  // observed edge: a likes b, pinned to 1
  CHECK(q.out.find("b\t1.000000") == 0);

  RunResult traced = run("query --kg " + graph_path().string() + " --adj " + adj.string() +
                         " --q '(i (p likes \"a\") (p knows \"e\"))' --top 2 --trace");
  CHECK(traced.code == 0);
  CHECK(traced.err.find("intersect") != std::string::npos);

  RunResult bad = run("query --kg " + graph_path().string() + " --adj " + adj.string() +
                      " --q '(p likes'");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("error:") != std::string::npos);
}

TEST_CASE("boolean build needs no model and text format loads back") {
  fs::path adj = work_dir() / "adj_bool";
  RunResult b = run("build-adj --kg " + graph_path().string() + " --out " + adj.string() +
                    " --boolean --text");
  CHECK(b.code == 0);
  std::string header = slurp(adj / "r0.adj").substr(0, 20);
  CHECK(header.find("lqot-adjacency") == 0);

  RunResult missing = run("build-adj --kg " + graph_path().string() + " --out " +
                          (work_dir() / "adj_none").string());
  CHECK(missing.code == 2);  // trained build without --model
}

TEST_CASE("gen-queries writes one record per sample") {
  fs::path wl = work_dir() / "workload.tsv";
  RunResult r = run("gen-queries --kg " + graph_path().string() +
                    " --shapes 1p,2p,2i,2u --count 3 --seed 4 --out " + wl.string());
  CHECK(r.code == 0);
  std::vector<WorkloadRecord> records = load_workload(wl.string());
  REQUIRE(records.size() == 12);
  for (const WorkloadRecord& rec : records) {
    CHECK_FALSE(rec.query.empty());
    CHECK_FALSE(rec.gold_names.empty());
  }
}

TEST_CASE("eval prints the table and honors --csv and --details") {
  fs::path cfg = work_dir() / "exp.cfg";
  {
    std::ofstream out(cfg, std::ios::binary);
    out << "triples_path = " << graph_path().string() << "\n"
        << "shapes = 1p,2i\nper_shape_count = 2\nmatrices = boolean\n";
  }
  RunResult r = run("eval --config " + cfg.string());
  CHECK(r.code == 0);
  CHECK(r.err.find("lqot eval | ") != std::string::npos);
  CHECK(r.out.find("hit@1") != std::string::npos);
  CHECK(r.out.find("shape,k,hits,total,rate") != std::string::npos);

  fs::path csv = work_dir() / "out.csv";
  fs::path details = work_dir() / "details.tsv";
  RunResult f = run("eval --config " + cfg.string() + " --csv " + csv.string() + " --details " +
                    details.string());
  CHECK(f.code == 0);
  CHECK(f.out.find("shape,k,hits,total,rate") == std::string::npos);  // went to the file
  CHECK(slurp(csv).find("shape,k,hits,total,rate") == 0);
  std::string detail_text = slurp(details);
  CHECK(detail_text.find("1p\t") != std::string::npos);
  CHECK(detail_text.find("2i\t") != std::string::npos);

  RunResult bad = run("eval --config " + (work_dir() / "missing.cfg").string());
  CHECK(bad.code == 2);
}
