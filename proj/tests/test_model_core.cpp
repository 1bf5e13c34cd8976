#include <cmath>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "ionmodes/coulomb.hpp"
#include "ionmodes/curvature_model.hpp"
#include "ionmodes/error.hpp"
#include "ionmodes/frequency_model.hpp"
#include "ionmodes/geometry.hpp"
#include "ionmodes/modes.hpp"
#include "oracles.hpp"

using namespace ionmodes;

namespace {

constexpr double kAlpha = -0.383;
const double kTheta = 19.0 * kPi / 180.0;

CurvatureModel fitted_model() {
  return CurvatureModel::from_frequencies(3876.60, 3.299, kAlpha, -1.202);
}

}  // namespace

TEST(Geometry, SitePositionMatchesHandEvaluation) {
  const TrapGeometry g = make_geometry(30e-6, kTheta);
  EXPECT_NEAR(g.positions[0].x() * 1e6, -15.000, 5e-4);
  EXPECT_NEAR(g.positions[0].y() * 1e6, 8.6603, 5e-5);
  EXPECT_NEAR(g.positions[0].z(), 0.0, 1e-18);
}

TEST(Geometry, EquilateralAndCentred) {
  const TrapGeometry g = make_geometry(30e-6, kTheta);
  const Vec3 centroid = (g.positions[0] + g.positions[1] + g.positions[2]) / 3.0;
  EXPECT_LT(centroid.norm(), 1e-20);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR((g.positions[i] - g.positions[(i + 1) % 3]).norm(), 30e-6, 1e-18);
    EXPECT_NEAR(g.radial_axes[i].norm(), 1.0, 1e-12);
  }
}

TEST(Geometry, ThreefoldRotationMapsSites) {
  const TrapGeometry g = make_geometry(30e-6, 0.3);
  const Eigen::Matrix3d R = Eigen::AngleAxisd(2.0 * kPi / 3.0, Vec3::UnitZ()).toRotationMatrix();
  // A -> C -> B -> A under +120 degrees about z.
  const int image[3] = {1, 2, 0};
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT((R * g.positions[i] - g.positions[image[i]]).norm(), 1e-18);
    EXPECT_LT((R * g.radial_axes[i] - g.radial_axes[image[i]]).norm(), 1e-12);
  }
}

TEST(Geometry, ZeroTiltAxesInPlane) {
  const TrapGeometry g = make_geometry(30e-6, 0.0);
  for (const Vec3& e : g.radial_axes) EXPECT_EQ(e.z(), 0.0);
}

TEST(Geometry, RejectsBadInput) {
  EXPECT_THROW(make_geometry(0.0, 0.1), Error);
  EXPECT_THROW(make_geometry(-1e-6, 0.1), Error);
  EXPECT_THROW(make_geometry(std::nan(""), 0.1), Error);
  try {
    make_geometry(0.0, 0.1);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidGeometry);
  }
}

TEST(Coulomb, CouplingAnchorsFittedFrequency) {
  const TrapGeometry g = make_geometry(30e-6, kTheta);
  const PhysicalConstants pc;
  const double k0 = bare_curvature_for(g, pc, 3876.60);
  const CurvatureModel m = coulomb_curvatures(g, pc, k0);
  EXPECT_NEAR(m.delta_k, 1.43e-14, 0.01e-14);
  EXPECT_NEAR(m.f_R_kHz, 3876.60, 1e-9);
  EXPECT_NEAR(m.delta_f_kHz() / 3.299, 1.0, 0.10);
  // frozen: closed form with CODATA constants
  EXPECT_NEAR(m.delta_f_kHz(), 3.1162, 5e-4);
  EXPECT_NEAR(curvature_to_frequency(m, 3.0 * m.delta_k) / 9.897, 1.0, 0.10);
}

TEST(Coulomb, ScalesAsInverseCube) {
  const PhysicalConstants pc;
  const double k0 = 1e-10;
  const CurvatureModel a = coulomb_curvatures(make_geometry(30e-6, kTheta), pc, k0);
  const CurvatureModel b = coulomb_curvatures(make_geometry(60e-6, kTheta), pc, k0);
  EXPECT_NEAR(b.delta_k / a.delta_k, 0.125, 1e-14);
}

TEST(Coulomb, NoChargeNoCoupling) {
  PhysicalConstants pc;
  pc.elementary_charge = 0.0;
  const CurvatureModel m = coulomb_curvatures(make_geometry(30e-6, kTheta), pc, 1e-10);
  EXPECT_EQ(m.k_offs, 1e-10);
  EXPECT_THROW(m.validate(), Error);  // delta_k = 0 is not a usable model
}

TEST(Coulomb, UnstableWhenBareCurvatureTooSmall) {
  try {
    coulomb_curvatures(make_geometry(30e-6, 0.0), PhysicalConstants{}, -1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnstableConfiguration);
  }
}

TEST(Coulomb, RestEnergyIsThreePairs) {
  const TrapGeometry g = make_geometry(30e-6, kTheta);
  const PhysicalConstants pc;
  const std::array<double, 3> zero{0.0, 0.0, 0.0};
  EXPECT_NEAR(potential_energy(g, pc, 1e-10, zero) / (3.0 * pc.coulomb_constant() / 30e-6), 1.0, 1e-14);
}

TEST(Coulomb, CyclicRelabelingLeavesEnergyUnchanged) {
  const TrapGeometry g = make_geometry(30e-6, kTheta);
  const PhysicalConstants pc;
  const std::array<double, 3> d{1e-7, -2e-7, 3e-7};
  const std::array<double, 3> r{3e-7, 1e-7, -2e-7};
  const std::array<double, 3> e{2e-7, 2e-7, 2e-7};
  const double v = potential_energy(g, pc, 1e-10, d);
  EXPECT_NEAR(potential_energy(g, pc, 1e-10, r) / v, 1.0, 1e-12);
  EXPECT_GT(potential_energy(g, pc, 1e-10, e), 0.0);
}

TEST(Coulomb, DisplacementLimitEnforced) {
  const TrapGeometry g = make_geometry(30e-6, kTheta);
  const std::array<double, 3> big{4e-6, 0.0, 0.0};
  EXPECT_THROW(potential_energy(g, PhysicalConstants{}, 1e-10, big), Error);
}

TEST(Coulomb, FiniteDifferenceHessianMatchesClosedForm) {
  const TrapGeometry g = make_geometry(30e-6, kTheta);
  const PhysicalConstants pc;
  const double k0 = bare_curvature_for(g, pc, 3876.60);
  const CurvatureModel m = coulomb_curvatures(g, pc, k0);
  const Eigen::Matrix3d H = build_hessian(m, {0.0, 0.0});
  const double h = 1e-9;
  auto V = [&](double a, double b, double c) {
    const std::array<double, 3> d{a, b, c};
    return potential_energy(g, pc, k0, d);
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      auto at = [&](double si, double sj) {
        std::array<double, 3> d{0.0, 0.0, 0.0};
        d[i] += si * h;
        d[j] += sj * h;
        return V(d[0], d[1], d[2]);
      };
      const double fd = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
      EXPECT_NEAR(fd / H(i, j), 1.0, 1e-3) << "entry " << i << j;
    }
  }
}

TEST(Hessian, ZeroShimsAllOnes) {
  const CurvatureModel m = fitted_model();
  const Eigen::Matrix3d H = build_hessian(m, {0.0, 0.0});
  const Eigen::Matrix3d E = m.k_offs * Eigen::Matrix3d::Identity() + m.delta_k * Eigen::Matrix3d::Ones();
  EXPECT_LT((H - E).norm(), 1e-12 * m.k_offs);
}

TEST(Hessian, TraceIdentity) {
  const CurvatureModel m = fitted_model();
  const Eigen::Matrix3d H = build_hessian(m, {0.7, -0.3});
  const double lhs = (H.trace() - 3.0 * m.k_offs - 3.0 * m.delta_k) / m.delta_k;
  EXPECT_NEAR(lhs, (1.0 + 2.0 * kAlpha) * 0.4, 1e-6);  // k_offs cancels only to ~1e-7 relative
  EXPECT_NEAR(coupling_matrix(kAlpha, {0.7, -0.3}).trace() - 3.0, (1.0 + 2.0 * kAlpha) * 0.4, 1e-15);
}

TEST(Hessian, ShimDiagonalEntry) {
  const CurvatureModel m = fitted_model();
  const Eigen::Matrix3d H = build_hessian(m, {1.0, 0.0});
  EXPECT_NEAR((H(2, 2) - m.k_offs - m.delta_k) / m.delta_k, kAlpha, 1e-6);
  EXPECT_NEAR(coupling_matrix(kAlpha, {1.0, 0.0})(2, 2) - 1.0, kAlpha, 1e-15);
}

TEST(Eigensystem, ZeroShimsDegenerateCanonical) {
  const ModeSystem ms = eigensystem(kAlpha, {0.0, 0.0});
  EXPECT_NEAR(ms.delta_k[0], 0.0, 1e-12);
  EXPECT_NEAR(ms.delta_k[1], 0.0, 1e-12);
  EXPECT_NEAR(ms.delta_k[2], 3.0, 1e-12);
  EXPECT_EQ(ms.gauge, GaugeTag::CanonicalDegenerate);
  EXPECT_LT((ms.vector(Band::Lower) - Eigen::Vector3d(0, 1, -1) / std::sqrt(2.0)).norm(), 1e-15);
  EXPECT_LT((ms.vector(Band::Middle) - Eigen::Vector3d(2, -1, -1) / std::sqrt(6.0)).norm(), 1e-15);
  EXPECT_LT((ms.vector(Band::Upper) - Eigen::Vector3d(1, 1, 1) / std::sqrt(3.0)).norm(), 1e-12);
}

TEST(Eigensystem, StartPointValuesAndVectors) {
  const double s = 1.0 / (kAlpha - 1.0);
  const ModeSystem ms = eigensystem(kAlpha, {s, s});
  // frozen from an independent numpy eigh evaluation
  EXPECT_NEAR(ms.delta_k[0], -0.446131597975416, 1e-12);
  EXPECT_NEAR(ms.delta_k[1], 0.139654839651489, 1e-12);
  EXPECT_NEAR(ms.delta_k[2], 2.968081964397678, 1e-12);
  EXPECT_LT((ms.vector(Band::Lower) - Eigen::Vector3d(-1, 1, 0) / std::sqrt(2.0)).norm(), 1e-12);
  EXPECT_LT((ms.vector(Band::Middle) - Eigen::Vector3d(-1, -1, std::sqrt(2.0)) / 2.0).norm(), 1e-12);
  EXPECT_LT((ms.vector(Band::Upper) - Eigen::Vector3d(1, 1, std::sqrt(2.0)) / 2.0).norm(), 1e-12);
  EXPECT_NEAR(ms.gap(Band::Middle, Band::Upper), 2.0 * std::sqrt(2.0), 1e-12);
}

TEST(Eigensystem, DecoupledModeAlongSA) {
  const ModeSystem ms = eigensystem(kAlpha, {0.9, 0.0});
  const Eigen::Vector3d d = Eigen::Vector3d(0, 1, -1) / std::sqrt(2.0);
  bool found = false;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(std::abs(ms.eigenvectors.col(k).dot(d)) - 1.0) < 1e-12) {
      found = true;
      EXPECT_NEAR(ms.delta_k[k], kAlpha * 0.9, 1e-12);
      EXPECT_LT((ms.eigenvectors.col(k) - d * (ms.eigenvectors(2, k) < 0 ? 1.0 : -1.0)).norm(), 1e-12);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Eigensystem, MatchesTrigonometricRoots) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    const auto ref = oracle::symmetric_eigenvalues(oracle::coupling(kAlpha, a, b));
    const ModeSystem ms = eigensystem(kAlpha, {a, b});
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(ms.delta_k[k], ref[k], 1e-10);
  }
}

TEST(Eigensystem, ResidualAndOrthonormality) {
  const CurvatureModel m = fitted_model();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const ShimPoint s{u(rng), u(rng)};
    const ModeSystem ms = eigensystem(m, s);
    const Eigen::Matrix3d H = build_hessian(m, s);
    EXPECT_LT((ms.eigenvectors.transpose() * ms.eigenvectors - Eigen::Matrix3d::Identity()).norm(), 1e-12);
    Eigen::Matrix3d P = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d v = ms.eigenvectors.col(k);
      P += v * v.transpose();
      EXPECT_LT((H * v - (m.k_offs + ms.delta_k[k] * m.delta_k) * v).norm(), 1e-10 * m.k_offs);
    }
    EXPECT_LT((P - Eigen::Matrix3d::Identity()).norm(), 1e-12);
    EXPECT_LE(ms.delta_k[0], ms.delta_k[1]);
    EXPECT_LE(ms.delta_k[1], ms.delta_k[2]);
  }
}

TEST(Eigensystem, SwapSymmetry) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const ShimPoint s{u(rng), u(rng)};
    const ModeSystem a = eigensystem(kAlpha, s);
    const ModeSystem b = eigensystem(kAlpha, s.swapped());
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.delta_k[k], b.delta_k[k], 1e-12);
  }
}

TEST(Eigensystem, TraceIdentityProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const ShimPoint s{u(rng), u(rng)};
    const ModeSystem ms = eigensystem(kAlpha, s);
    const double sum = ms.delta_k[0] + ms.delta_k[1] + ms.delta_k[2];
    EXPECT_NEAR(sum, 3.0 + (1.0 + 2.0 * kAlpha) * (s.s_A + s.s_B), 1e-12);
  }
}

TEST(Eigensystem, DecoupledModeProperty) {
  const Eigen::Vector3d d = Eigen::Vector3d(0, 1, -1) / std::sqrt(2.0);
  for (double sA = -5.0; sA <= 5.0; sA += 0.37) {
    const Eigen::Vector3d Cd = coupling_matrix(kAlpha, {sA, 0.0}) * d;
    EXPECT_LT((Cd - kAlpha * sA * d).norm(), 1e-14);
    const ModeSystem ms = eigensystem(kAlpha, {sA, 0.0});
    double best = 0.0;
    for (int k = 0; k < 3; ++k) best = std::max(best, std::abs(ms.eigenvectors.col(k).dot(d)));
    EXPECT_NEAR(best, 1.0, 1e-12);
  }
}

TEST(Surfaces, ConicalIntersectionOnlyAtOrigin) {
  const CurvatureModel m = fitted_model();
  const auto grid = square_grid(41, 2.0);
  const auto bands = eigen_surfaces(m, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double gap = bands[i][1] - bands[i][0];
    if (grid[i].radius() < 1e-12) {
      EXPECT_LT(gap, 1e-9);
    } else {
      EXPECT_GT(gap, 1e-6);
    }
    EXPECT_GT(bands[i][2] - bands[i][1], 2.0);
  }
}

TEST(Surfaces, SymmetricUnderPointSwap) {
  const CurvatureModel m = fitted_model();
  const std::size_t n = 31;
  const auto grid = square_grid(n, 1.5);
  const auto bands = eigen_surfaces(m, grid);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(bands[i * n + j][k], bands[j * n + i][k], 1e-12);
    }
  }
}

TEST(FrequencyModel, DegenerateAtZeroVoltage) {
  const FrequencyModel fm;
  const auto f = mode_frequencies(fm, 0.0);
  EXPECT_NEAR(f[0], 3876.60, 1e-9);
  EXPECT_NEAR(f[1], 3876.60, 1e-9);
  EXPECT_NEAR(f[2], 3876.60 + 3.0 * 3.299, 1e-9);
}

TEST(FrequencyModel, LinearBranchSlope) {
  const FrequencyModel fm;
  EXPECT_NEAR(linear_branch_slope(fm), 1.52, 0.005);
  for (double dv : {-2.0, -1.0, 0.5, 1.7}) {
    const auto f = mode_frequencies(fm, dv);
    const double lin = linear_branch_frequency(fm, dv);
    double best = 1e9;
    for (double x : f) best = std::min(best, std::abs(x - lin));
    EXPECT_LT(best, 1e-9);
  }
}

TEST(FrequencyModel, SumRule) {
  const FrequencyModel fm;
  const double dv = 1.0;
  const auto f = mode_frequencies(fm, dv);
  const double lin = linear_branch_frequency(fm, dv);
  const double pair = f[0] + f[1] + f[2] - lin;
  EXPECT_NEAR(pair - 2.0 * fm.f_R_kHz - linear_branch_slope(fm) * dv,
              3.0 * fm.delta_f_kHz + fm.delta_f_kHz * fm.c_per_mV * dv, 1e-9);
}

TEST(FrequencyModel, RoundTripThroughCurvatures) {
  const FrequencyModel fm;
  const CurvatureModel m = fm.to_curvature_model();
  const FrequencyModel back = FrequencyModel::from(m);
  EXPECT_NEAR(back.delta_f_kHz, fm.delta_f_kHz, 1e-12);
  EXPECT_NEAR(m.omega_R() / kTwoPi * 1e-3, fm.f_R_kHz, 1e-9 * fm.f_R_kHz);
}

TEST(CurvatureToFrequency, LinearAndExact) {
  const CurvatureModel m = fitted_model();
  EXPECT_EQ(curvature_to_frequency(m, 0.0), 0.0);
  EXPECT_NEAR(curvature_to_frequency(m, m.delta_k), 3.299, 1e-9);
  for (double x : {-0.01, -0.006, -0.003, 1e-4, 0.004, 0.01}) {
    const double dk = x * m.k_offs;
    const double lin = curvature_to_frequency(m, dk);
    const double ex = curvature_to_frequency_exact(m, dk);
    // Relative to the absolute mode frequency the two agree far below 0.1%.
    EXPECT_LT(std::abs(lin - ex) / (m.f_R_kHz + ex), 1e-3);
    // Relative to the shift itself the error is about |x|/4.
    EXPECT_NEAR(std::abs(lin - ex) / std::abs(ex), std::abs(x) / 4.0, std::abs(x) * 0.02);
    if (std::abs(x) <= 0.004) EXPECT_LT(std::abs(lin - ex) / std::abs(ex), 1e-3);
  }
  try {
    curvature_to_frequency(m, -2.0 * m.k_offs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnstableMode);
  }
}

TEST(ShimPoint, VoltageAndRange) {
  const ShimPoint s = ShimPoint::from_voltage(1.0, -0.5, -1.202);
  EXPECT_DOUBLE_EQ(s.s_A, -1.202);
  EXPECT_DOUBLE_EQ(s.s_B, 0.601);
  EXPECT_NO_THROW(s.validate());
  EXPECT_THROW((ShimPoint{6.0, 0.0}.validate()), Error);
  EXPECT_THROW((ShimPoint{std::nan(""), 0.0}.validate()), Error);
}
