#include <chstab/io.hpp>

#include <cstdlib>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace {

using namespace chstab;

TEST(FormatNumber, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, oracle::kPi}) {
    const std::string s = format_number(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(0.0), "0");
}

TEST(TrajectoryCsv, HeaderAndRows) {
  Trajectory t;
  Eigen::Vector4d x(1.0, 0.0, 0.0, 2.0);
  t.record(0.0, x, Eigen::Vector2d(0.5, -0.25), 2);
  t.record(0.1, 0.5 * x, Eigen::Vector2d(0.0, 1.0), 2);
  std::ostringstream os;
  write_trajectory_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,y_norm,z_norm,norm,w1,w2");
  std::getline(is, line);
  EXPECT_EQ(line, "0,1,2,2.2360679774997898,0.5,-0.25");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 22), "0.10000000000000001,0.");
  EXPECT_FALSE(std::getline(is, line));
}

TEST(TrajectoryCsv, NoWeightColumnsWithoutControl) {
  Trajectory t;
  t.record(0.0, Eigen::Vector2d(3.0, 4.0), Vector(), 1);
  std::ostringstream os;
  write_trajectory_csv(os, t);
  EXPECT_EQ(os.str(), "t,y_norm,z_norm,norm\n0,3,4,5\n");
}

TEST(Json, MatrixIsRowMajor) {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(to_json(m).dump(), "[[1.0,2.0,3.0],[4.0,5.0,6.0]]");
}

TEST(Json, KeyOrderIsStable) {
  const PhysParams p = derive_params(1.0, 1.0, 1.0, -1.0);
  const Json j = to_json(p);
  std::string keys;
  for (const auto& [k, v] : j.items()) keys += k + ",";
  EXPECT_EQ(keys, "nu,l0,gamma0,fbar,alpha0,gamma,l,f_l,lambda_bar,");
  EXPECT_EQ(to_json(p).dump(), j.dump());
}

TEST(Json, SpectralReportCarriesCounts) {
  Matrix m = Matrix::Zero(3, 3);
  m(1, 1) = 1.0;
  m(2, 2) = -1.0;
  const Json j = to_json(spectral_report(m));
  EXPECT_EQ(j["counts"]["unstable"], 1);
  EXPECT_EQ(j["counts"]["neutral"], 1);
  EXPECT_EQ(j["counts"]["stable"], 1);
  EXPECT_EQ(j["eigenvalues"][0]["class"], "unstable");
  EXPECT_EQ(j["eigenvalues"].size(), 3u);
}

TEST(Json, IntervalModesOmitSecondIndex) {
  const ModeSet modes = neumann_modes(Domain::interval(2.0, {Side::left}), 3);
  const Json j = to_json(modes);
  EXPECT_FALSE(j[0].contains("n"));
  EXPECT_EQ(j[1]["m"], 1);
  const Json r = to_json(neumann_modes(Domain::rectangle(1.0, 1.0, {Side::left}), 3));
  EXPECT_TRUE(r[1].contains("n"));
  EXPECT_EQ(r[1]["degenerate"], true);
}

TEST(Json, AssumptionGapNullWhenNoPairs) {
  AssumptionReport r;
  r.h1_min_gap = std::numeric_limits<double>::infinity();
  EXPECT_TRUE(to_json(r)["h1"]["min_gap"].is_null());
}

}  // namespace
