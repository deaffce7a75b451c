#include "cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = usec::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kPowers = "1,2,4,8,16,32";

}  // namespace

TEST_CASE("cli solve") {
  auto r = run({"solve", "--placement", "cyclic", "--n", "6", "--j", "3", "--speeds", kPowers});
  CHECK(r.code == 0);
  CHECK(r.out.find("c* = 1/7 (0.14285714285714285)") != std::string::npos);
  CHECK(r.out.find("bottleneck: sub-matrices {3} machines {1,2,3}") != std::string::npos);

  r = run({"solve", "--placement", "repetition", "--n", "6", "--j", "3", "--speeds", kPowers, "--assign"});
  CHECK(r.code == 0);
  CHECK(r.out.find("c* = 3/7") != std::string::npos);
  CHECK(r.out.find("g,f,row_start,row_end,machines") != std::string::npos);

  r = run({"solve", "--placement", "man", "--n", "6", "--j", "3", "--speeds", kPowers});
  CHECK(r.code == 0);
  CHECK(r.out.find("c* = 3/31") != std::string::npos);
}

TEST_CASE("cli exit codes") {
  CHECK(run({}).code == 1);
  CHECK(run({"solve"}).code == 1);
  CHECK(run({"solve", "--speeds", "1,2"}).code == 1);
  CHECK(run({"solve", "--speeds", "1,2,x,4,5,6"}).code == 1);
  CHECK(run({"solve", "--placement", "bogus", "--speeds", kPowers}).code == 1);
  CHECK(run({"trials", "--dist", "gamma:2"}).code == 1);
  CHECK(run({"trials", "--trials", "0"}).code == 1);
  CHECK(run({"simulate", "/nonexistent/scenario.json"}).code == 1);
  const auto r = run({"solve", "--placement", "repetition", "--n", "4", "--g", "2", "--j", "2", "--speeds", "1,1,1,1",
                      "--s", "1", "--available", "1,2,3"});
  CHECK(r.code == 2);
  CHECK(r.err.find("sub-matrix 2") != std::string::npos);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("cli assign and verify") {
  const fs::path dir = fs::temp_directory_path() / "usec_cli_test";
  fs::create_directories(dir);
  const std::string file = (dir / "a.csv").string();
  for (const char* mode : {"heterogeneous", "homogeneous"}) {
    CHECK(run({"assign", "--placement", "cyclic", "--n", "6", "--j", "3", "--speeds", kPowers, "--s", "1", "--mode",
               mode, "--rows", "30", "--out", file})
              .code == 0);
    auto r = run({"verify", "--assignment", file, "--s", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("ok:", 0) == 0);
    r = run({"verify", "--assignment", file, "--s", "2"});
    CHECK(r.code == 2);
    CHECK(r.out.find("counterexample") != std::string::npos);
  }
  {
    std::ofstream f(file);
    f << "# usec-assignment machines=2 submatrices=1 rows_per_submatrix=4\ng,f,row_start,row_end,machines\n1,1,1,x,1\n";
  }
  CHECK(run({"verify", "--assignment", file}).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("cli trials writes CSVs") {
  const fs::path dir = fs::temp_directory_path() / "usec_cli_trials";
  const auto r = run({"trials", "--trials", "20", "--seed", "4", "--out", dir.string()});
  CHECK(r.code == 0);
  std::ifstream f(dir / "trials.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "trial_id,seed,placement,c_star");
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "histogram.csv"));
  fs::remove_all(dir);
}
