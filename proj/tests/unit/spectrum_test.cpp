#include <chstab/errors.hpp>
#include <chstab/loop.hpp>
#include <chstab/spectrum.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracles.hpp"

namespace {

using namespace chstab;
namespace r1 = oracle::r1;

ModeSet r1_modes(int k = 32) { return neumann_modes(Domain::interval(r1::kLength, {Side::right}), k); }
PhysParams r1_params() { return derive_params(1.0, 1.0, 1.0, -1.0); }

TEST(DeriveParams, UnitCoefficients) {
  const PhysParams p = derive_params(1.0, 1.0, 1.0, -1.0);
  EXPECT_DOUBLE_EQ(p.alpha0, 1.0);
  EXPECT_DOUBLE_EQ(p.gamma, 1.0);
  EXPECT_DOUBLE_EQ(p.l, 1.0);
  EXPECT_DOUBLE_EQ(p.f_l, 0.0);
}

TEST(DeriveParams, ScaledCoefficients) {
  const PhysParams p = derive_params(1.0, 4.0, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(p.alpha0, 0.5);
  EXPECT_DOUBLE_EQ(p.gamma, 2.0);
  EXPECT_DOUBLE_EQ(p.l, 4.0);
  EXPECT_DOUBLE_EQ(p.f_l, 4.0);
}

TEST(DeriveParams, RejectsNonpositive) {
  EXPECT_THROW(derive_params(0.0, 1.0, 1.0, 0.0), ConfigError);
  EXPECT_THROW(derive_params(1.0, -1.0, 1.0, 0.0), ConfigError);
  EXPECT_THROW(derive_params(1.0, 1.0, 0.0, 0.0), ConfigError);
  EXPECT_THROW(derive_params(1.0, 1.0, 1.0, std::nan("")), ConfigError);
}

TEST(DeriveParams, IdentitiesHoldOverRandomScan) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const double nu = oracle::uniform(rng, 0.05, 5.0);
    const double l0 = oracle::uniform(rng, 0.05, 5.0);
    const double g0 = oracle::uniform(rng, 0.05, 5.0);
    const double fbar = oracle::uniform(rng, -3.0, 3.0);
    const PhysParams p = derive_params(nu, l0, g0, fbar);
    const double s = std::max({1.0, g0, p.l});
    EXPECT_NEAR(p.alpha0 * p.alpha0 * l0, g0, 1e-14 * s);
    EXPECT_NEAR(p.gamma * p.gamma, p.l, 1e-14 * s);
    EXPECT_NEAR(p.f_l - p.gamma * p.gamma, fbar, 1e-14 * std::max(s, std::abs(fbar)));
  }
}

TEST(EffectiveSlope, Constants) {
  const ModeSet m = r1_modes(8);
  EXPECT_EQ(effective_slope(Equilibrium::constant(0.0), m), -1.0);
  EXPECT_EQ(effective_slope(Equilibrium::constant(1.0), m), 2.0);
  EXPECT_DOUBLE_EQ(effective_slope(Equilibrium::constant(0.5), m), 3.0 * 0.25 - 1.0);
}

TEST(EffectiveSlope, TabulatedCosine) {
  const ModeSet m = r1_modes(16);
  const Transform t(m);
  Vector table(t.grid_size());
  for (int i = 0; i < t.grid_size(); ++i) table(i) = std::cos(oracle::kPi * t.points()[i][0] / r1::kLength);
  EXPECT_NEAR(effective_slope(Equilibrium::tabulated(table), m), 0.5, 1e-12);
}

TEST(EffectiveSlope, TabulatedSizeMismatch) {
  const ModeSet m = r1_modes(16);
  EXPECT_THROW(effective_slope(Equilibrium::tabulated(Vector::Zero(5)), m), ConfigError);
}

TEST(ModeBlock, Examples) {
  const PhysParams p = r1_params();
  EXPECT_TRUE(mode_block(0.0, p).isZero(0.0));
  const Eigen::Matrix2d a = mode_block(-0.5, p);
  EXPECT_DOUBLE_EQ(a(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(a(0, 1), -0.5);
  EXPECT_DOUBLE_EQ(a(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(a(1, 1), 0.5);
  const Eigen::Matrix2d b = mode_block(-1.0, p);
  EXPECT_DOUBLE_EQ(b(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(b(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(b(1, 1), 1.0);
}

TEST(QuadraticRoots, ReferenceMode) {
  const RootPair r = quadratic_roots(-0.5, r1_params());
  EXPECT_NEAR(r.minus, r1::kLambda1, 1e-15);
  EXPECT_NEAR(r.plus, r1::kLambdaPlus, 1e-15);
  EXPECT_NEAR(r.minus, -0.1403882032, 1e-10);
}

TEST(QuadraticRoots, BothPositiveAtMuMinusTwo) {
  const RootPair r = quadratic_roots(-2.0, r1_params());
  EXPECT_NEAR(r.minus, 3.0 - std::sqrt(5.0), 1e-14);
  EXPECT_NEAR(r.plus, 3.0 + std::sqrt(5.0), 1e-14);
}

TEST(QuadraticRoots, PositiveCurvatureGivesNoNegativeRoot) {
  const PhysParams p = derive_params(1.0, 1.0, 1.0, 1.0);
  const RootPair r = quadratic_roots(-1.0, p);
  EXPECT_GT(r.minus, 0.0);
  EXPECT_GT(r.plus, 0.0);
}

TEST(QuadraticRoots, RequiresNegativeMu) {
  EXPECT_THROW(quadratic_roots(0.0, r1_params()), ConfigError);
}

TEST(QuadraticRoots, AgreeWithDenseBlockAndTextbookFormula) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const PhysParams p = derive_params(oracle::uniform(rng, 0.1, 3.0), oracle::uniform(rng, 0.1, 3.0),
                                       oracle::uniform(rng, 0.1, 3.0), oracle::uniform(rng, -2.0, 2.0));
    const double mu = -oracle::uniform(rng, 1e-3, 50.0);
    const RootPair r = quadratic_roots(mu, p);
    const Eigen::EigenSolver<Eigen::Matrix2d> es(mode_block(mu, p), false);
    std::array<double, 2> d{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
    std::sort(d.begin(), d.end());
    const double scale = std::max(1.0, std::abs(r.plus));
    EXPECT_NEAR(r.minus, d[0], 1e-10 * scale);
    EXPECT_NEAR(r.plus, d[1], 1e-10 * scale);
    const long double b = (p.f_l + 1.0L) * mu - p.nu * static_cast<long double>(mu) * mu;
    const long double c = -p.nu * static_cast<long double>(mu) * mu * mu + (p.f_l - p.gamma * p.gamma) * static_cast<long double>(mu) * mu;
    const auto [q1, q2] = oracle::quadratic(b, c);
    EXPECT_NEAR(r.minus, q1, 1e-10 * scale);
    EXPECT_NEAR(r.plus, q2, 1e-10 * scale);
    // At most one root is nonpositive.
    EXPECT_GT(r.plus, 0.0);
  }
}

TEST(UnstableBasis, ReferenceScenario) {
  const UnstableBasis b = unstable_basis(r1_modes(), r1_params());
  ASSERT_EQ(b.size(), 3);
  EXPECT_NEAR(b[0].lambda, r1::kLambda1, 1e-15);
  EXPECT_EQ(b[0].kind, EntryKind::negative);
  EXPECT_EQ(b[0].mode, 1);
  EXPECT_NEAR(b[0].coeff_phi, r1::kCoeffPhi, 1e-15);
  EXPECT_NEAR(b[0].coeff_psi, r1::kCoeffPsi, 1e-15);
  EXPECT_EQ(b[1].kind, EntryKind::zero_sym);
  EXPECT_EQ(b[2].kind, EntryKind::zero_anti);
  EXPECT_EQ(b[1].lambda, 0.0);
  EXPECT_EQ(b[2].lambda, 0.0);
  EXPECT_TRUE(b.warnings.empty());
}

TEST(UnstableBasis, ZeroEntriesAreConstantPairsInPhysicalSpace) {
  const double len = r1::kLength;
  const ModeSet m = r1_modes(8);
  const UnstableBasis b = unstable_basis(m, r1_params());
  // (1, 1)/sqrt(2 m) and (-1, 1)/sqrt(2 m) evaluated at any point.
  const double v = 1.0 / std::sqrt(2.0 * len);
  const int n = b.size();
  EXPECT_NEAR(b[n - 2].coeff_phi * m.eval(0, {0.7, 0.0}), v, 1e-15);
  EXPECT_NEAR(b[n - 2].coeff_psi * m.eval(0, {0.7, 0.0}), v, 1e-15);
  EXPECT_NEAR(b[n - 1].coeff_phi * m.eval(0, {0.7, 0.0}), -v, 1e-15);
  EXPECT_NEAR(b[n - 1].coeff_psi * m.eval(0, {0.7, 0.0}), v, 1e-15);
}

TEST(UnstableBasis, EntriesAreEigenvectorsOfTheirBlock) {
  const PhysParams p = derive_params(0.4, 1.3, 2.0, -1.0);
  const ModeSet m = neumann_modes(Domain::interval(9.0, {Side::right}), 40);
  const UnstableBasis b = unstable_basis(m, p);
  ASSERT_GT(b.size(), 3);
  for (int j = 0; j < b.size() - 2; ++j) {
    const Eigen::Vector2d v(b[j].coeff_phi, b[j].coeff_psi);
    const Eigen::Vector2d r = mode_block(m[b[j].mode].mu, p) * v - b[j].lambda * v;
    EXPECT_LE(r.norm(), 1e-12);
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    if (j > 0) EXPECT_LE(b[j - 1].lambda, b[j].lambda);
  }
}

TEST(UnstableBasis, PositiveCurvatureLeavesOnlyZeroEntries) {
  const ModeSet m = r1_modes();
  const UnstableBasis b = unstable_basis(m, derive_params(1.0, 1.0, 1.0, effective_slope(Equilibrium::constant(1.0), m)));
  ASSERT_EQ(b.size(), 2);
  EXPECT_EQ(b[0].kind, EntryKind::zero_sym);
  EXPECT_EQ(b[1].kind, EntryKind::zero_anti);
}

TEST(UnstableBasis, BoundaryModeIsExcludedWithWarning) {
  // L = pi puts mu_2 = -1 exactly on (F_l - gamma^2)/nu = -1.
  const ModeSet m = neumann_modes(Domain::interval(oracle::kPi, {Side::right}), 16);
  const UnstableBasis b = unstable_basis(m, r1_params());
  EXPECT_EQ(b.size(), 2);
  ASSERT_EQ(b.warnings.size(), 1u);
  EXPECT_NE(b.warnings[0].find("boundary"), std::string::npos);
}

TEST(UnstableBasis, TruncationTooSmallIsReported) {
  const ModeSet m = neumann_modes(Domain::interval(40.0, {Side::right}), 4);
  EXPECT_THROW(unstable_basis(m, r1_params()), ConfigError);
}

TEST(UnstableBasis, OrthonormalAsStateVectors) {
  const PhysParams p = derive_params(0.3, 1.0, 1.5, -1.0);
  const ModeSet m = neumann_modes(Domain::rectangle(5.0, 3.3, {Side::right}), 60);
  const UnstableBasis b = unstable_basis(m, p);
  const Matrix v = b.projector_rows(m.size());
  EXPECT_LE((v * v.transpose() - Matrix::Identity(b.size(), b.size())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NecessaryCondition, RandomScanWithPositiveCurvatureFindsNoNegativeEigenvalue) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const double fbar = oracle::uniform(rng, 1e-3, 3.0);
    const PhysParams p = derive_params(oracle::uniform(rng, 0.05, 4.0), oracle::uniform(rng, 0.05, 4.0),
                                       oracle::uniform(rng, 0.05, 4.0), fbar);
    const bool rect = i % 3 == 0;
    const Domain d = rect ? Domain::rectangle(oracle::uniform(rng, 0.5, 10.0), oracle::uniform(rng, 0.5, 10.0), {Side::top})
                          : Domain::interval(oracle::uniform(rng, 0.5, 20.0), {Side::right});
    const ModeSet m = neumann_modes(d, 24);
    const UnstableBasis b = unstable_basis(m, p);
    EXPECT_EQ(b.size(), 2);
    // Independent of the scan window: no mode block has a negative eigenvalue.
    for (int k = 1; k < m.size(); ++k) EXPECT_GT(quadratic_roots(m[k].mu, p).minus, 0.0);
  }
}

TEST(RootSignStructure, NegativeRootsOnlyInsideTheWindow) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    const PhysParams p = derive_params(oracle::uniform(rng, 0.05, 4.0), oracle::uniform(rng, 0.05, 4.0),
                                       oracle::uniform(rng, 0.05, 4.0), oracle::uniform(rng, -3.0, 3.0));
    const double window = (p.f_l - p.gamma * p.gamma) / p.nu;
    const double mu = -oracle::uniform(rng, 1e-3, 10.0);
    const RootPair r = quadratic_roots(mu, p);
    if (mu < window) EXPECT_GE(r.minus, -1e-12 * std::max(1.0, r.plus));
  }
}

TEST(CheckAssumptions, ReferenceScenarioPasses) {
  const ModeSet m = r1_modes();
  const PhysParams p = r1_params();
  const AssumptionReport r = check_assumptions(m, p, unstable_basis(m, p));
  EXPECT_TRUE(r.h0_ok);
  EXPECT_TRUE(r.h1_ok);
  EXPECT_TRUE(r.traces_ok);
  EXPECT_TRUE(r.necessary_condition);
  EXPECT_DOUBLE_EQ(r.lambda_bar, 1.0);
  EXPECT_NEAR(r.h0_nearest_distance, 0.5, 1e-14);
  ASSERT_EQ(r.trace_sup.size(), 3u);
  EXPECT_NEAR(r.trace_sup[0], r1::kTrace1, 1e-15);
  EXPECT_NEAR(r.trace_sup[1], r1::kTraceZero, 1e-15);
}

TEST(CheckAssumptions, LengthPiViolatesH0) {
  const ModeSet m = neumann_modes(Domain::interval(oracle::kPi, {Side::right}), 32);
  const PhysParams p = r1_params();
  const AssumptionReport r = check_assumptions(m, p, unstable_basis(m, p));
  EXPECT_FALSE(r.h0_ok);
  EXPECT_EQ(r.h0_nearest_mode, 1);
  EXPECT_FALSE(r.ok());
}

TEST(CheckAssumptions, DegenerateSquareViolatesH1) {
  // Lx = Ly = 1.5 pi: (1,0) and (0,1) share mu = -4/9 inside the window and
  // give equal negative eigenvalues; lambda_bar = 1 is not a Neumann eigenvalue.
  const ModeSet m = neumann_modes(Domain::rectangle(1.5 * oracle::kPi, 1.5 * oracle::kPi, {Side::right}), 32);
  const PhysParams p = r1_params();
  const UnstableBasis b = unstable_basis(m, p);
  const AssumptionReport r = check_assumptions(m, p, b);
  EXPECT_TRUE(r.h0_ok);
  EXPECT_FALSE(r.h1_ok);
  EXPECT_EQ(r.h1_min_gap, 0.0);
}

TEST(CheckAssumptions, VanishingTraceIsFlagged) {
  const ModeSet m = r1_modes();
  const PhysParams p = r1_params();
  UnstableBasis b = unstable_basis(m, p);
  b.entries[0].coeff_psi = 0.0;
  const AssumptionReport r = check_assumptions(m, p, b);
  EXPECT_FALSE(r.traces_ok);
  EXPECT_EQ(r.trace_sup[0], 0.0);
}

TEST(CheckAssumptions, TracesNonzeroOnRectangleSides) {
  const ModeSet m = neumann_modes(Domain::rectangle(6.0, 2.0, {Side::right}), 40);
  const PhysParams p = r1_params();
  const AssumptionReport r = check_assumptions(m, p, unstable_basis(m, p));
  EXPECT_TRUE(r.traces_ok);
  for (double s : r.trace_sup) EXPECT_GT(s, 1e-10);
}

TEST(GlobalOracle, OpenLoopSpectrumIsUnionOfBlocks) {
  for (const Domain& d : {Domain::interval(r1::kLength, {Side::right}), Domain::rectangle(4.0, 2.5, {Side::top})}) {
    const ModeSet m = neumann_modes(d, 32);
    const PhysParams p = r1_params();
    const Eigen::EigenSolver<Matrix> es(-assemble_open_loop(m, p), false);
    std::vector<double> dense;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      EXPECT_LE(std::abs(es.eigenvalues()(i).imag()), 1e-9);
      dense.push_back(es.eigenvalues()(i).real());
    }
    std::vector<double> blocks{0.0, 0.0};
    for (int k = 1; k < m.size(); ++k) {
      const RootPair r = quadratic_roots(m[k].mu, p);
      blocks.push_back(r.minus);
      blocks.push_back(r.plus);
    }
    std::sort(dense.begin(), dense.end());
    std::sort(blocks.begin(), blocks.end());
    for (size_t i = 0; i < dense.size(); ++i) EXPECT_NEAR(dense[i], blocks[i], 1e-9);
  }
}

TEST(ZeroMultiplicity, TwoNeutralEigenvaluesWhenH0Holds) {
  const ModeSet m = r1_modes();
  const SpectralReport r = spectral_report(assemble_open_loop(m, r1_params()));
  EXPECT_EQ(r.n_neutral, 2);
  int zeros = 0;
  for (const SpectralEntry& e : r.eigenvalues) zeros += std::abs(e.value) <= 1e-10;
  EXPECT_EQ(zeros, 2);
}

}  // namespace
