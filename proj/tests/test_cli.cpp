#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ebbm/cli.hpp"
#include "ebbm/dataset_io.hpp"

using namespace ebbm;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ebbm");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ebbm_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

const fs::path kGolden = EBBM_GOLDEN_DIR;

}  // namespace

TEST_CASE("dataset parsing") {
  const auto d = parse_dataset("3 2\n1 1 -1\n+1 -1 -1\n");
  CHECK(d == Dataset(3, 2, {1, 1, -1, 1, -1, -1}));
  CHECK(format_dataset(d) == "3 2\n1 1 -1\n1 -1 -1\n");
  CHECK(parse_dataset(format_dataset(d)) == d);

  auto line_of = [](const std::string& text) {
    try {
      parse_dataset(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("") == 1);
  CHECK(line_of("3 x\n") == 1);
  CHECK(line_of("3 2\n1 1 1\n1 0 1\n") == 3);
  CHECK(line_of("3 2\n1 1 1\n1 1\n") == 3);
  CHECK(line_of("3 2\n1 1 1\n") == 3);
  CHECK(line_of("3 1\n1 1 1\n1 1 1\n") == 3);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("generate") {
  const auto a = scratch("gen_a.txt"), b = scratch("gen_b.txt");
  const std::vector<std::string> base{"generate", "--n", "4", "--N", "3", "--J", "0", "--H", "0", "--seed", "5"};
  auto args = base;
  args.insert(args.end(), {"--out", a.string()});
  CHECK(run(args).code == 0);
  args = base;
  args.insert(args.end(), {"--out", b.string()});
  const auto r = run(args);
  CHECK(r.code == 0);
  CHECK(r.err.find("machine_seed") != std::string::npos);
  CHECK(slurp(a) == slurp(b));
  const auto d = read_dataset(a.string());
  CHECK(d.n() == 4);
  CHECK(d.N() == 3);

  CHECK(run({"generate", "--n", "4"}).code == 2);
  CHECK(run({"generate", "--n", "4", "--N", "3", "--prior", "cauchy"}).code == 2);
  CHECK(run({"generate", "--n", "4", "--N", "3", "--J", "-1"}).code == 2);
  CHECK(run({"generate", "--n", "4", "--N", "3", "--delta-beta", "0"}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("generate golden") {
  const auto out = scratch("gen_golden.txt");
  REQUIRE(run({"generate", "--n", "6", "--N", "4", "--J", "0.5", "--H", "0.1", "--seed", "7",
               "--out", out.string()})
              .code == 0);
  CHECK(slurp(out) == slurp(kGolden / "generate_n6_N4_seed7.txt"));
}

TEST_CASE("estimate") {
  SUBCASE("degenerate data") {
    const auto p = write_file("up.txt", "3 2\n1 1 1\n1 1 1\n");
    const auto r = run({"estimate", "--in", p.string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("degenerate magnetization") != std::string::npos);
  }
  SUBCASE("parse error carries the line") {
    const auto p = write_file("bad.txt", "3 2\n1 1 1\n1 2 1\n");
    const auto r = run({"estimate", "--in", p.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
  }
  SUBCASE("missing file") {
    CHECK(run({"estimate", "--in", scratch("missing.txt").string()}).code == 1);
  }
  SUBCASE("hand example diverges") {
    const auto p = write_file("example.txt", "3 2\n1 1 -1\n1 -1 -1\n");
    const auto r = run({"estimate", "--in", p.string()});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["branch"] == "diverged");
    CHECK(doc["gamma_hat"] == "inf");
    CHECK(doc["H_hat"].is_null());
    CHECK(doc["seed"].is_null());
    CHECK(doc["version"] == kResultVersion);
    CHECK(doc["input_digest"] == fnv1a_hex(slurp(p)));
    CHECK(r.out == slurp(kGolden / "estimate_example.json"));
  }
  SUBCASE("golden json and csv on a generated file") {
    const auto in = kGolden / "generate_n6_N4_seed7.txt";
    const auto json = run({"estimate", "--in", in.string()});
    REQUIRE(json.code == 0);
    CHECK(json.out == slurp(kGolden / "estimate_n6_N4_seed7.json"));
    const auto csv = run({"estimate", "--in", in.string(), "--format", "csv"});
    REQUIRE(csv.code == 0);
    CHECK(csv.out == slurp(kGolden / "estimate_n6_N4_seed7.csv"));
    CHECK(run({"estimate", "--in", in.string(), "--format", "yaml"}).code == 2);
  }
}

TEST_CASE("generate then estimate round trip") {
  const auto p = scratch("round.txt");
  REQUIRE(run({"generate", "--n", "30", "--N", "12", "--J", "0.4", "--H", "0.2", "--seed", "3",
               "--out", p.string()})
              .code == 0);
  const auto d = read_dataset(p.string());
  const auto a = compute_stats(d);
  const auto b = compute_stats(parse_dataset(format_dataset(d)));
  CHECK(a.M == b.M);
  CHECK(a.C1 == b.C1);
  CHECK(a.C2 == b.C2);
  CHECK(a.Omega == b.Omega);
}

TEST_CASE("experiment") {
  const auto dir = scratch("exp_out");
  fs::remove_all(dir);
  const auto cfg = write_file("exp.cfg",
                              "# tiny sweep\nn = 20\nN=8\nH_true=0.1\nJ_grid=0.3\nprior=laplace\n"
                              "repeats=1\nseed=9\ndelta_beta=0.1\nsweeps=1\n");
  const auto r = run({"experiment", "--config", cfg.string(), "--out-dir", dir.string()});
  CHECK(r.code == 0);
  std::ifstream trials(dir / "trials.csv");
  std::string header, row, extra;
  std::getline(trials, header);
  CHECK(header == "n,N,H_true,J_true,prior,trial,seed,branch,gamma_hat,J_hat,H_hat,phi2_M,Phi_M,laplace_ok");
  CHECK(static_cast<bool>(std::getline(trials, row)));
  CHECK(row.rfind("20,8,0.10000000000000001,0.29999999999999999,laplace,0,", 0) == 0);
  CHECK_FALSE(static_cast<bool>(std::getline(trials, extra)));

  const auto bad = write_file("bad.cfg", "n=20\nwidth=3\n");
  const auto e = run({"experiment", "--config", bad.string(), "--out-dir", dir.string()});
  CHECK(e.code == 2);
  CHECK(e.err.find("width") != std::string::npos);
}

TEST_CASE("oracle and advise") {
  const auto g = run({"oracle", "--suite", "georges"});
  CHECK(g.code == 0);
  CHECK(g.out.find("georges PASS") != std::string::npos);
  CHECK(run({"oracle", "--suite", "psi", "--seed", "4"}).code == 0);
  const auto bad = run({"oracle", "--suite", "georges", "--perturb", "0.01"});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("inputs:") != std::string::npos);
  CHECK(run({"oracle", "--suite", "nope"}).code == 2);

  CHECK(run({"advise", "--H", "0", "--n", "300"}).out.rfind("N 120\n", 0) == 0);
  CHECK(run({"advise", "--H", "0.2", "--n", "300"}).out.rfind("N 30\n", 0) == 0);
  CHECK(run({"advise", "--H", "0.4", "--n", "1000"}).out.rfind("N 5\n", 0) == 0);
}
