#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ionmodes {

struct TraceMetadata {
  std::string label;   // e.g. path family or "exchange"
  double T_ms = 0.0;   // traversal time, 0 for static traces
  std::uint64_t seed = 0;
};

// Bright-state probability versus delay after the protocol's evolution.
struct FringeTrace {
  std::vector<double> delays_ms;
  std::vector<double> p_bright;
  std::vector<double> std_errors;
  std::size_t shots_per_point = 0;  // 0 marks an ideal, unsampled trace
  TraceMetadata metadata;

  [[nodiscard]] std::size_t size() const noexcept { return delays_ms.size(); }
  void validate() const;
};

// Normalised response on a (dV_A, df) grid; response[i * df.size() + j].
struct SpectrumMap {
  std::vector<double> dV_mV;
  std::vector<double> df_kHz;  // detuning from reference_kHz
  std::vector<double> response;
  double reference_kHz = 0.0;

  [[nodiscard]] double at(std::size_t i_dV, std::size_t j_df) const {
    return response[i_dV * df_kHz.size() + j_df];
  }
  void validate() const;
};

}  // namespace ionmodes
