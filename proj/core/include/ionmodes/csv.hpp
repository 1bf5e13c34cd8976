#pragma once

#include <string>
#include <string_view>

#include "ionmodes/trace.hpp"

namespace ionmodes {

// delay_ms,p_bright,std_err
std::string to_csv(const FringeTrace& trace);
FringeTrace fringe_from_csv(std::string_view text);

// dVA_mV,df_kHz,response in long format, dV-major.
std::string to_csv(const SpectrumMap& map);
SpectrumMap spectrum_from_csv(std::string_view text, double reference_kHz);

// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace ionmodes
