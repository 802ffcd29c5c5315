#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::path(SPECPACK_TEST_TMP) / "cli";

int run(const std::string& args) {
  const std::string cmd = std::string(SPECPACK_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string file(const std::string& name) { return (kWork / name).string(); }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::create_directories(kWork);
    ASSERT_EQ(run("generate --kind path --params points=20 --out " + file("path20.json")), 0);
    ASSERT_EQ(run("generate --kind torus_grid --params nx=12 ny=12 --out " + file("torus.json")), 0);
  }
};

}  // namespace

TEST_F(Cli, GenerateWritesSpaceSchema) {
  auto j = read_json(file("path20.json"));
  EXPECT_EQ(j.at("schema"), "specpack-space/1");
  EXPECT_EQ(j.at("points"), 20);
  EXPECT_EQ(run("generate --kind grid --params nx=3 bogus=1"), 2);
  EXPECT_EQ(run("generate --kind grid --params nx"), 2);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 64);
  EXPECT_EQ(run("frobnicate"), 64);
  EXPECT_EQ(run("pack --space " + file("path20.json")), 64);
  EXPECT_EQ(run("pack --space " + file("path20.json") + " --N 2 --r 1 --strategy clever"), 64);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, ConstantsTable) {
  ASSERT_EQ(run("constants --n 2..3 --variant both --out " + file("constants.json")), 0);
  auto j = read_json(file("constants.json"));
  EXPECT_EQ(j.at("schema"), "specpack-report/1");
  EXPECT_TRUE(j.at("pass").get<bool>());
  const auto& table = j.at("result").at("constants");
  ASSERT_EQ(table.size(), 4u);
  EXPECT_EQ(table[0].at("C1"), 345.0);
  EXPECT_EQ(table[1].at("C1"), 82.0);
  EXPECT_EQ(run("constants --n 0"), 2);
}

TEST_F(Cli, PackVerifyAndEnforce) {
  ASSERT_EQ(run("pack --space " + file("path20.json") + " --N 2 --r 1 --out " + file("pack.json")), 0);
  auto j = read_json(file("pack.json"));
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_EQ(j.at("result").at("A").size(), 2u);
  EXPECT_EQ(run("pack --space " + file("path20.json") + " --N 2 --r 1 --hypothesis enforce"), 2);
  EXPECT_EQ(run("pack --space " + file("missing.json") + " --N 2 --r 1"), 2);
}

TEST_F(Cli, RayleighFromPackOutput) {
  ASSERT_EQ(run("pack --space " + file("path20.json") + " --N 2 --r 1 --out " + file("pack2.json")), 0);
  ASSERT_EQ(run("rayleigh --space " + file("path20.json") + " --sets " + file("pack2.json") + " --r 1 --out " +
                file("ray.json")),
            0);
  EXPECT_TRUE(read_json(file("ray.json")).at("pass").get<bool>());
}

TEST_F(Cli, SpectrumAndVerify) {
  ASSERT_EQ(run("spectrum --space " + file("torus.json") + " --m 6 --out " + file("spec.json")), 0);
  ASSERT_EQ(run("verify --space " + file("torus.json") + " --a 0 --k 3 --kmax 10 --csv " + file("sweep.csv") +
                " --out " + file("verify.json")),
            0);
  auto j = read_json(file("verify.json"));
  EXPECT_TRUE(j.at("pass").get<bool>());
  std::ifstream csv(file("sweep.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 11);
  EXPECT_EQ(run("verify --space " + file("torus.json") + " --a 1 --k 3 --variant euclidean"), 2);
}

TEST_F(Cli, ReportsAreDeterministicExceptWallTime) {
  const std::string args = "pack --space " + file("torus.json") + " --N 4 --r 0.5 --seed 3 --out ";
  ASSERT_EQ(run(args + file("det1.json")), 0);
  ASSERT_EQ(run(args + file("det1.json")), 0);
  auto a = read_json(file("det1.json"));
  ASSERT_EQ(run(args + file("det2.json")), 0);
  auto b = read_json(file("det2.json"));
  a.erase("wall_time");
  b.erase("wall_time");
  // The digest covers argv, which names the output file.
  a.erase("input_digest");
  b.erase("input_digest");
  EXPECT_EQ(a, b);
}

TEST_F(Cli, BadInputsExitTwo) {
  {
    std::ofstream(file("bad.json")) << "{ nope";
    std::ofstream(file("tri.json")) << R"({"distance_matrix": [[0,1,5],[1,0,1],[5,1,0]]})";
    std::ofstream(file("three.csv")) << "0,0,1\n1,1,1\n";
  }
  EXPECT_EQ(run("spectrum --space " + file("bad.json") + " --m 2"), 2);
  EXPECT_EQ(run("spectrum --space " + file("tri.json") + " --m 2"), 2);
  EXPECT_EQ(run("spectrum --space " + file("three.csv") + " --format csv-points --dimension 2 --m 2"), 2);
}
