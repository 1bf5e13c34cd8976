#pragma once

#include <complex>
#include <optional>

#include <Eigen/Core>

#include "ionmodes/geometry.hpp"
#include "ionmodes/modes.hpp"

namespace ionmodes {

using Amplitudes = Eigen::Vector3cd;

enum class Basis { SiteABC, Eigen123 };

inline constexpr double kNormTolerance = 1e-9;

// One phonon shared among three oscillators. In the eigenmode basis the
// amplitudes refer to the columns of `modes`.
struct SinglePhononState {
  Amplitudes amplitudes = Amplitudes::Zero();
  Basis basis = Basis::SiteABC;
  std::optional<ModeSystem> modes;

  static SinglePhononState at_site(Site site);

  [[nodiscard]] double norm_squared() const noexcept { return amplitudes.squaredNorm(); }
  [[nodiscard]] double population(std::size_t i) const noexcept {
    return std::norm(amplitudes[static_cast<Eigen::Index>(i)]);
  }

  // Throws ErrorKind::Normalization if |sum |a|^2 - 1| > kNormTolerance.
  void require_normalized() const;
};

// Site -> eigen uses V^T, eigen -> site uses V (V holds the eigenvectors as columns).
SinglePhononState change_basis(const SinglePhononState& state, const ModeSystem& modes);

SinglePhononState to_site_basis(const SinglePhononState& state);
SinglePhononState to_eigen_basis(const SinglePhononState& state, const ModeSystem& modes);

}  // namespace ionmodes
