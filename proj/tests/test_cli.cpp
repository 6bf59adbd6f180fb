#include <doctest.h>

#include "cli.hpp"
#include "revmarkov/matrix_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace revmarkov;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run call(std::vector<std::string> args) {
  args.insert(args.begin(), "revmarkov");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "revmarkov_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("generate then solve writes P and a schema-1 report") {
  const std::string in = scratch("g.csv").string();
  const std::string out = scratch("p.csv").string();
  const std::string rep = scratch("r.json").string();
  REQUIRE(call({"generate", "--kind", "uniform", "--n", "12", "--seed", "3", "--output", in}).code == 0);
  const Run r = call({"solve", "--input", in, "--output", out, "--report", rep});
  CHECK(r.code == 0);
  std::ifstream f(rep);
  const json j = json::parse(f);
  CHECK(j["schema"] == 1);
  CHECK(j["status"] == "ok");
  CHECK(j["metrics_source"] == "serialized");
  CHECK(j["metrics"]["detailed_balance_inf"].get<double>() <= 1e-13);
  CHECK(j["config"]["format"] == "csv");
  MatrixFormat fmt;
  CHECK(read_matrix(fs::path(out), &fmt).rows() == 12);
  CHECK(fmt == MatrixFormat::Csv);
}

TEST_CASE("seeded commands are reproducible") {
  const std::string a = scratch("a.mm").string(), b = scratch("b.mm").string();
  call({"generate", "--kind", "sbm", "--n", "20", "--seed", "9", "--output", a});
  call({"generate", "--kind", "sbm", "--n", "20", "--seed", "9", "--output", b});
  std::ifstream fa(a), fb(b);
  CHECK(std::string(std::istreambuf_iterator<char>(fa), {}) == std::string(std::istreambuf_iterator<char>(fb), {}));
}

TEST_CASE("exit codes") {
  const std::string bad = scratch("bad.csv").string();
  {
    std::ofstream f(bad);
    f << "0.5,0.6\n0.5,0.5\n";
  }
  const std::string rep = scratch("bad.json").string();
  CHECK(call({"solve", "--input", bad, "--report", rep}).code == 2);
  std::ifstream f(rep);
  const json j = json::parse(f);
  CHECK(j["status"] == "error");
  CHECK(j["error"]["code"] == "RowSumViolation");
  CHECK(call({"solve", "--input", scratch("missing.csv").string()}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({"generate", "--kind", "zigzag", "--n", "5", "--output", scratch("z.mm").string()}).code == 2);
}

TEST_CASE("decompose, oracle, simulate and bench") {
  const std::string g = scratch("me.mm").string();
  call({"generate", "--kind", "multi-ergodic", "--n", "10", "--seed", "2", "--output", g});
  const Run d = call({"decompose", "--input", g});
  CHECK(d.code == 0);
  CHECK(json::parse(d.out)["class_sizes"].size() >= 2);

  const Run o = call({"oracle", "--input", g, "--output", scratch("o.mm").string()});
  CHECK(o.code == 0);
  CHECK(json::parse(o.out)["objective"].get<double>() >= 0.0);

  const Run s = call({"simulate", "--potential", "butane", "--steps", "5000", "--seed", "1", "--output-counts",
                      scratch("c.mm").string(), "--output-matrix", scratch("m.mm").string()});
  CHECK(s.code == 0);
  CHECK(json::parse(s.out)["total"] == 5000);

  const std::string suite = scratch("suite.csv").string();
  {
    std::ofstream f(suite);
    f << "kind,n,seed\nuniform,6,1\nnormal,6,2\n";
  }
  const std::string dir = scratch("bench").string();
  const Run b = call({"bench", "--suite", suite, "--out-dir", dir});
  CHECK(b.code == 0);
  CHECK(fs::exists(fs::path(dir) / "runs.csv"));
  std::ifstream prof(fs::path(dir) / "profile.csv");
  std::string header;
  std::getline(prof, header);
  CHECK(header == "solver,metric,tau,rho");
}
