#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ionmodes/curvature_model.hpp"

namespace ionmodes {

enum class Band { Lower = 1, Middle = 2, Upper = 3 };

inline constexpr std::size_t index(Band b) noexcept { return static_cast<std::size_t>(b) - 1; }

enum class GaugeTag {
  LargestComponentPositive,
  CanonicalDegenerate,  // lower pair replaced by the fixed basis c1, c2
};

inline constexpr double kDegeneracyTolerance = 1e-9;

struct ModeSystem {
  std::array<double, 3> delta_k{};  // units of delta_k, ascending
  Eigen::Matrix3d eigenvectors = Eigen::Matrix3d::Identity();  // columns
  GaugeTag gauge = GaugeTag::LargestComponentPositive;

  [[nodiscard]] double value(Band b) const noexcept { return delta_k[index(b)]; }
  [[nodiscard]] Eigen::Vector3d vector(Band b) const { return eigenvectors.col(index(b)); }
  [[nodiscard]] double gap(Band lower, Band upper) const noexcept {
    return value(upper) - value(lower);
  }
};

// Eigen-decomposition of coupling_matrix(alpha, s).
ModeSystem eigensystem(double alpha, ShimPoint s);
ModeSystem eigensystem(const CurvatureModel& model, ShimPoint s);

using BandValues = std::array<double, 3>;

std::vector<BandValues> eigen_surfaces(const CurvatureModel& model,
                                       std::span<const ShimPoint> grid);

// Square grid of side n over [-range, range]^2, row-major in s_A then s_B.
std::vector<ShimPoint> square_grid(std::size_t n, double range);

}  // namespace ionmodes
