#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

const fs::path kConfigs = CHSTAB_CONFIG_DIR;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("chstab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args, const std::string& out_name = "out") {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + CHSTAB_CLI + "\" " + args + " --out \"" +
                            (dir_ / out_name).string() + "\" >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  // The single run directory under an output root.
  fs::path run_dir(const std::string& out_name = "out") {
    fs::path found;
    int count = 0;
    for (const auto& e : fs::directory_iterator(dir_ / out_name)) {
      found = e.path();
      ++count;
    }
    EXPECT_EQ(count, 1);
    return found;
  }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  static std::string config(const std::string& name) {
    return "--config \"" + (kConfigs / name).string() + "\"";
  }

  fs::path dir_;
};

TEST_F(Cli, SpectrumReportsReferenceEigenvalues) {
  const Result r = run("spectrum " + config("r1.ini"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(slurp(run_dir() / "spectrum.json"));
  EXPECT_EQ(j["unstable_basis"]["n"], 3);
  EXPECT_NEAR(j["unstable_basis"]["entries"][0]["lambda"].get<double>(), -0.1403882032022076, 1e-12);
  EXPECT_EQ(j["unstable_basis"]["entries"][1]["kind"], "zero_sym");
  EXPECT_TRUE(j["assumptions"]["ok"].get<bool>());
  EXPECT_EQ(j["open_loop"]["counts"]["unstable"], 1);
  EXPECT_EQ(j["k"], 32);
}

TEST_F(Cli, SynthCertifiesReference) {
  const Result r = run("synth " + config("r1.ini"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(slurp(run_dir() / "law.json"));
  EXPECT_TRUE(j["certified"].get<bool>());
  EXPECT_NEAR(j["decay_margin"].get<double>(), 0.7639320225002103, 1e-9);
  EXPECT_EQ(j["law"]["convention"]["name"], "shifted-");
}

TEST_F(Cli, SynthWithWrongSignIsNotCertified) {
  const Result r = run("synth " + config("r1.ini") + " --convention shifted+");
  EXPECT_EQ(r.code, 3);
  const Json j = Json::parse(slurp(run_dir() / "law.json"));
  EXPECT_FALSE(j["certified"].get<bool>());
}

TEST_F(Cli, PositiveCurvatureHasTwoEntries) {
  const Result r = run("synth " + config("phi_one.ini"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(slurp(run_dir() / "law.json"));
  EXPECT_EQ(j["law"]["n"], 2);
}

TEST_F(Cli, VerifyReferencePasses) {
  const Result r = run("verify " + config("r1.ini"));
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const Json j = Json::parse(slurp(run_dir() / "report.json"));
  EXPECT_EQ(j["status"], "pass");
  for (const Json& c : j["checks"]) EXPECT_NE(c["status"], "fail") << c.dump();
}

TEST_F(Cli, AssumptionViolationFailsVerify) {
  const Result r = run("verify " + config("h0_violation.ini"));
  EXPECT_EQ(r.code, 5);
  const Json j = Json::parse(slurp(run_dir() / "report.json"));
  bool saw = false;
  for (const Json& c : j["checks"]) {
    if (c["name"] == "assumptions") {
      saw = true;
      EXPECT_EQ(c["status"], "fail");
    }
  }
  EXPECT_TRUE(saw);
}

TEST_F(Cli, AssumptionViolationRefusesSynthesis) {
  const Result r = run("synth " + config("h0_violation.ini"));
  EXPECT_EQ(r.code, 2);
  const Json e = Json::parse(r.err);
  EXPECT_EQ(e["error"], "assumption");
}

TEST_F(Cli, ZeroGainFailsCertification) {
  const Result r = run("verify --zero-gain " + config("r1.ini"));
  EXPECT_EQ(r.code, 5);
  const Json j = Json::parse(slurp(run_dir() / "report.json"));
  bool failed = false;
  for (const Json& c : j["checks"]) {
    if (c["name"] == "closed_loop_certification") failed = c["status"] == "fail";
  }
  EXPECT_TRUE(failed);
}

TEST_F(Cli, BadConfigExitsWithConfigError) {
  const fs::path bad = write("bad.ini", "[domain]\nkind = interval\nlength = -1\ngamma1 = right\n");
  const Result r = run("spectrum --config \"" + bad.string() + "\"");
  EXPECT_EQ(r.code, 1);
  const Json e = Json::parse(r.err);
  EXPECT_EQ(e["error"], "config");
  EXPECT_NE(e["message"].get<std::string>().find("length"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("spectrum").code, 1);
  EXPECT_EQ(run("spectrum " + config("r1.ini") + " --k-modes 1").code, 1);
  EXPECT_EQ(run("spectrum " + config("r1.ini") + " --convention bogus").code, 1);
}

TEST_F(Cli, LinearSimulationWritesTrajectory) {
  const Result r = run("simulate " + config("r1.ini"));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(run_dir() / "trajectory.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,y_norm,z_norm,norm,w1,w2,w3");
  const Json j = Json::parse(slurp(run_dir() / "report.json"));
  EXPECT_GT(j["fit"]["c2"].get<double>(), 1.5);
}

TEST_F(Cli, UnstableLinearSimulationDiverges) {
  const Result r = run("simulate " + config("r1.ini") + " --convention shifted+");
  EXPECT_EQ(r.code, 4) << r.out << r.err;
}

TEST_F(Cli, NonlinearSimulationDecays) {
  const Result r = run("simulate --nonlinear " + config("r1.ini"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(slurp(run_dir() / "report.json"));
  EXPECT_LE(j["final_norm"].get<double>(), 0.01 * j["initial_norm"].get<double>());
}

TEST_F(Cli, RunsAreDeterministic) {
  ASSERT_EQ(run("verify " + config("r1.ini"), "a").code, 0);
  ASSERT_EQ(run("verify " + config("r1.ini"), "b").code, 0);
  const fs::path a = run_dir("a");
  const fs::path b = run_dir("b");
  EXPECT_EQ(a.filename(), b.filename());
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
}

TEST_F(Cli, SeedChangesOutputDirectory) {
  ASSERT_EQ(run("spectrum " + config("r1.ini") + " --seed 1", "a").code, 0);
  ASSERT_EQ(run("spectrum " + config("r1.ini") + " --seed 2", "b").code, 0);
  EXPECT_NE(run_dir("a").filename(), run_dir("b").filename());
}

}  // namespace
