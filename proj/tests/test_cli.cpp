#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gridcs/io.hpp"

namespace fs = std::filesystem;
using Catch::Approx;
using gridcs::io::Json;

namespace {

const fs::path &workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("gridcs_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string &name) { return (workdir() / name).string(); }

int run(const std::string &args, const std::string &stdout_file = "") {
  std::string cmd = std::string(GRIDCS_CLI) + " " + args;
  cmd += " > " + (stdout_file.empty() ? std::string("/dev/null") : path(stdout_file));
  cmd += " 2> " + path("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string &text) {
  std::size_t n = 0;
  for (char ch : text) n += ch == '\n';
  return n;
}

}  // namespace

TEST_CASE("simulate", "[cli]") {
  const std::string args = "simulate --dist unif --a 0 --b 1 --gamma 0.3333 --c 0.5 --n 500 --seed 7 -o ";
  REQUIRE(run(args + path("d.csv")) == 0);
  const std::string first = slurp(path("d.csv"));
  CHECK(count_lines(first) == 501);
  CHECK(first.rfind("x,y\n", 0) == 0);
  REQUIRE(fs::exists(path("d.csv.json")));
  const Json side = Json::parse(slurp(path("d.csv.json")));
  CHECK(side["grid"]["K"] == 15);

  REQUIRE(run(args + path("d2.csv")) == 0);
  CHECK(slurp(path("d2.csv")) == first);

  CHECK(run("simulate --gamma 0 --c 0.5 --n 500 -o " + path("bad.csv")) == 1);
  CHECK(run("simulate --gamma 1/3 --c 0.5 -o " + path("bad.csv")) == 1);
  CHECK(run("frobnicate") == 1);
}

TEST_CASE("fit", "[cli]") {
  {
    std::ofstream f(path("mono.csv"));
    f << "t,N,Z\n0.25,4,0\n0.5,4,1\n0.75,4,3\n1,4,4\n";
  }
  REQUIRE(run("fit -i " + path("mono.csv"), "mono_fit.csv") == 0);
  CHECK(slurp(path("mono_fit.csv")) == "t,F_hat\n0.25,0\n0.5,0.25\n0.75,0.75\n1,1\n");

  REQUIRE(run("simulate --gamma 1/2 --c 1 --n 300 --seed 3 -o " + path("r.csv")) == 0);
  CHECK(run("fit --check-gcm -i " + path("r.csv"), "r_fit.csv") == 0);
  CHECK(slurp(path("stderr.txt")).find("cross-check passed") != std::string::npos);

  { std::ofstream f(path("empty.csv")); }
  CHECK(run("fit -i " + path("empty.csv")) == 2);
  CHECK(run("fit -i " + path("does_not_exist.csv")) == 2);

  {
    std::ofstream f(path("offgrid.csv"));
    f << "x,y\n0.33,1\n";
  }
  CHECK(run("fit -i " + path("offgrid.csv") + " --a 0 --b 1 --delta 0.25") == 2);
}

TEST_CASE("ci", "[cli]") {
  REQUIRE(run("simulate --gamma 1/3 --c 0.5 --n 500 --seed 11 -o " + path("ci.csv")) == 0);
  const std::string base = "ci -i " + path("ci.csv") + " --x0 0.5 --B 1000 --seed 5";
  REQUIRE(run(base, "ci_05.json") == 0);
  const Json wide = Json::parse(slurp(path("ci_05.json")));
  CHECK(wide["mode"] == "adaptive");
  CHECK(wide["length"].get<double>() == Approx(0.24).margin(0.08));
  CHECK(wide["lower"].get<double>() <= wide["estimate"].get<double>());
  CHECK(wide["c_hat"].get<double>() > 0.0);
  CHECK(wide["nuisance"]["alpha_hat"].get<double>() > 0.0);

  REQUIRE(run(base, "ci_05b.json") == 0);
  CHECK(slurp(path("ci_05.json")) == slurp(path("ci_05b.json")));

  REQUIRE(run(base + " --eta 0.5", "ci_50.json") == 0);
  const Json narrow = Json::parse(slurp(path("ci_50.json")));
  CHECK(narrow["length"].get<double>() < wide["length"].get<double>());

  const Json side = Json::parse(slurp(path("ci.csv.json")));
  const double t8 = 8.0 * side["grid"]["delta"].get<double>();
  REQUIRE(run("ci -i " + path("ci.csv") + " --t " + gridcs::io::fmt(t8) + " --B 500", "ci_t.json") == 0);
  CHECK(Json::parse(slurp(path("ci_t.json")))["t_l"].get<double>() == Approx(t8));
  CHECK(run("ci -i " + path("ci.csv") + " --t 0.5 --B 500") == 1);

  REQUIRE(run(base + " --mode oracle-chernoff", "ci_ch.json") == 0);
  CHECK(Json::parse(slurp(path("ci_ch.json")))["mode"] == "oracle-chernoff");
  CHECK(run(base + " --mode oracle-gaussian") == 1);
  CHECK(run(base + " --mode oracle-gaussian --gamma0 0.2 --c0 0.5") == 0);

  CHECK(run("ci -i " + path("missing.csv") + " --x0 0.5") == 2);
  CHECK(run("ci -i " + path("ci.csv")) == 1);

  {
    std::ofstream f(path("flat.csv"));
    f << "t,N,Z\n";
    for (int i = 1; i <= 10; ++i) f << i / 10.0 << ",10,5\n";
  }
  CHECK(run("ci -i " + path("flat.csv") + " --x0 0.5 --B 200") == 3);
}

TEST_CASE("quantiles and ecdf", "[cli]") {
  REQUIRE(run("quantiles --c 0.5 --alpha 0.5 --beta 0.5 --probs 0.025,0.975 --B 3000 --Ka 300 --seed 1",
              "q.json") == 0);
  const Json q = Json::parse(slurp(path("q.json")));
  REQUIRE(q["quants"].size() == 2);
  CHECK(q["quants"][0].get<double>() <= q["quants"][1].get<double>());
  CHECK(q["config"]["B"] == 3000);
  CHECK(run("quantiles --c -1 --alpha 0.5 --beta 0.5") == 1);

  REQUIRE(run("ecdf --alpha 0.35355 --beta 0.25 --c-list 1,3,10 --B 1000", "e.csv") == 0);
  const std::string e = slurp(path("e.csv"));
  CHECK(count_lines(e) == 4);
  CHECK(e.rfind("c,ks_gaussian,ks_chernoff\n", 0) == 0);
}

TEST_CASE("coverage battery", "[cli]") {
  const std::string cfg = std::string(GRIDCS_CONFIG_DIR) + "/regime_battery.json";
  {
    // Same battery, cut down to a smoke-test size.
    Json j = Json::parse(slurp(cfg));
    j["defaults"]["reps"] = 3;
    j["defaults"]["sampler"]["B"] = 100;
    std::ofstream f(path("battery.json"));
    f << j.dump(2);
  }
  REQUIRE(run("coverage " + path("battery.json") + " -o " + path("rep1.csv")) == 0);
  const std::string r1 = slurp(path("rep1.csv"));
  CHECK(count_lines(r1) == 19);
  CHECK(r1.find("error") == std::string::npos);

  REQUIRE(run("coverage " + path("battery.json") + " --threads 2 -o " + path("rep2.csv")) == 0);
  CHECK(slurp(path("rep2.csv")) == r1);

  std::istringstream in(r1);
  const auto table = gridcs::io::read_csv(in);
  std::size_t cr_col = 0;
  while (table.header[cr_col] != "CR_P") ++cr_col;
  for (const auto &row : table.rows) {
    const double cr = gridcs::io::parse_double(row[cr_col]);
    CHECK(cr >= 0.0);
    CHECK(cr <= 1.0);
  }
  CHECK(run("coverage " + path("nope.json")) == 2);
}
