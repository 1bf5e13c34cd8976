#include "ionmodes/state.hpp"

#include <cmath>
#include <string>

#include "ionmodes/error.hpp"

namespace ionmodes {

SinglePhononState SinglePhononState::at_site(Site site) {
  SinglePhononState s;
  s.amplitudes[static_cast<Eigen::Index>(index(site))] = 1.0;
  return s;
}

void SinglePhononState::require_normalized() const {
  const double n = norm_squared();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kNormTolerance) {
    throw Error(ErrorKind::Normalization,
                "state norm^2 = " + std::to_string(n) + " differs from 1");
  }
}

SinglePhononState change_basis(const SinglePhononState& state, const ModeSystem& modes) {
  state.require_normalized();
  SinglePhononState out;
  if (state.basis == Basis::SiteABC) {
    out.amplitudes = modes.eigenvectors.transpose().cast<std::complex<double>>() * state.amplitudes;
    out.basis = Basis::Eigen123;
    out.modes = modes;
  } else {
    out.amplitudes = modes.eigenvectors.cast<std::complex<double>>() * state.amplitudes;
    out.basis = Basis::SiteABC;
  }
  return out;
}

SinglePhononState to_site_basis(const SinglePhononState& state) {
  if (state.basis == Basis::SiteABC) return state;
  if (!state.modes) {
    throw Error(ErrorKind::InvalidArgument, "eigenbasis state carries no mode system");
  }
  return change_basis(state, *state.modes);
}

SinglePhononState to_eigen_basis(const SinglePhononState& state, const ModeSystem& modes) {
  return change_basis(to_site_basis(state), modes);
}

}  // namespace ionmodes
