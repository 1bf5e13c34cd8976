#include "ionmodes/modes.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace ionmodes {
namespace {

// Largest-magnitude component made positive; near-ties go to the last index.
void fix_sign(Eigen::Ref<Eigen::Vector3d> v) {
  const double vmax = v.cwiseAbs().maxCoeff();
  int pick = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) >= vmax * (1.0 - 1e-9)) pick = i;
  }
  if (v[pick] < 0.0) v = -v;
}

const Eigen::Vector3d& canonical_c1() {
  static const Eigen::Vector3d c = Eigen::Vector3d(0.0, 1.0, -1.0) / std::sqrt(2.0);
  return c;
}

const Eigen::Vector3d& canonical_c2() {
  static const Eigen::Vector3d c = Eigen::Vector3d(2.0, -1.0, -1.0) / std::sqrt(6.0);
  return c;
}

}  // namespace

ModeSystem eigensystem(double alpha, ShimPoint s) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(coupling_matrix(alpha, s));
  ModeSystem ms;
  for (int i = 0; i < 3; ++i) ms.delta_k[i] = solver.eigenvalues()[i];
  ms.eigenvectors = solver.eigenvectors();

  if (ms.delta_k[1] - ms.delta_k[0] < kDegeneracyTolerance) {
    // Rotate the degenerate pair onto the fixed basis when it spans the same plane.
    const Eigen::Matrix<double, 3, 2> sub = ms.eigenvectors.leftCols<2>();
    const Eigen::Vector3d p1 = sub * (sub.transpose() * canonical_c1());
    const Eigen::Vector3d p2 = sub * (sub.transpose() * canonical_c2());
    if (p1.norm() > 1.0 - 1e-6 && p2.norm() > 1.0 - 1e-6) {
      ms.eigenvectors.col(0) = canonical_c1();
      ms.eigenvectors.col(1) = canonical_c2();
      fix_sign(ms.eigenvectors.col(2));
      ms.gauge = GaugeTag::CanonicalDegenerate;
      return ms;
    }
  }
  for (int i = 0; i < 3; ++i) fix_sign(ms.eigenvectors.col(i));
  return ms;
}

ModeSystem eigensystem(const CurvatureModel& model, ShimPoint s) {
  return eigensystem(model.alpha, s);
}

std::vector<BandValues> eigen_surfaces(const CurvatureModel& model,
                                       std::span<const ShimPoint> grid) {
  std::vector<BandValues> out;
  out.reserve(grid.size());
  for (const ShimPoint& p : grid) out.push_back(eigensystem(model.alpha, p).delta_k);
  return out;
}

std::vector<ShimPoint> square_grid(std::size_t n, double range) {
  std::vector<ShimPoint> g;
  if (n == 0) return g;
  g.reserve(n * n);
  const double step = n > 1 ? 2.0 * range / static_cast<double>(n - 1) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = n > 1 ? -range + step * static_cast<double>(i) : 0.0;
      const double b = n > 1 ? -range + step * static_cast<double>(j) : 0.0;
      g.push_back({a, b});
    }
  }
  return g;
}

}  // namespace ionmodes
