#include "ionmodes/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "ionmodes/error.hpp"

namespace ionmodes {
namespace {

std::vector<std::vector<double>> parse_rows(std::string_view text, std::string_view header,
                                            std::size_t columns) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header) {
        throw Error(ErrorKind::Io, "line 1: expected header '" + std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = std::min(line.find(',', pos), line.size());
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + comma, v);
      if (ec != std::errc{} || ptr != line.data() + comma) {
        throw Error(ErrorKind::Io, "line " + std::to_string(lineno) + ": malformed number");
      }
      row.push_back(v);
      pos = comma + 1;
    }
    if (row.size() != columns) {
      throw Error(ErrorKind::Io, "line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(columns) + " columns");
    }
    rows.push_back(std::move(row));
  }
  if (!seen_header) throw Error(ErrorKind::Io, "empty CSV");
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void FringeTrace::validate() const {
  if (delays_ms.size() != p_bright.size() ||
      (!std_errors.empty() && std_errors.size() != p_bright.size())) {
    throw Error(ErrorKind::InvalidArgument, "trace columns differ in length");
  }
  for (std::size_t i = 0; i < p_bright.size(); ++i) {
    if (!std::isfinite(delays_ms[i]) || !(p_bright[i] >= 0.0 && p_bright[i] <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "trace values must be finite probabilities");
    }
  }
}

void SpectrumMap::validate() const {
  if (dV_mV.empty() || df_kHz.size() < 2 || response.size() != dV_mV.size() * df_kHz.size()) {
    throw Error(ErrorKind::InvalidArgument, "spectrum map dimensions are inconsistent");
  }
}

std::string to_csv(const FringeTrace& trace) {
  trace.validate();
  std::string s = "delay_ms,p_bright,std_err\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    s += format_double(trace.delays_ms[i]) + ',' + format_double(trace.p_bright[i]) + ',' +
         format_double(trace.std_errors.empty() ? 0.0 : trace.std_errors[i]) + '\n';
  }
  return s;
}

FringeTrace fringe_from_csv(std::string_view text) {
  FringeTrace t;
  for (const auto& r : parse_rows(text, "delay_ms,p_bright,std_err", 3)) {
    t.delays_ms.push_back(r[0]);
    t.p_bright.push_back(r[1]);
    t.std_errors.push_back(r[2]);
  }
  t.validate();
  return t;
}

std::string to_csv(const SpectrumMap& map) {
  map.validate();
  std::string s = "dVA_mV,df_kHz,response\n";
  for (std::size_t i = 0; i < map.dV_mV.size(); ++i) {
    for (std::size_t j = 0; j < map.df_kHz.size(); ++j) {
      s += format_double(map.dV_mV[i]) + ',' + format_double(map.df_kHz[j]) + ',' +
           format_double(map.at(i, j)) + '\n';
    }
  }
  return s;
}

SpectrumMap spectrum_from_csv(std::string_view text, double reference_kHz) {
  const auto rows = parse_rows(text, "dVA_mV,df_kHz,response", 3);
  std::vector<double> dv;
  std::vector<double> df;
  for (const auto& r : rows) {
    dv.push_back(r[0]);
    df.push_back(r[1]);
  }
  std::sort(dv.begin(), dv.end());
  dv.erase(std::unique(dv.begin(), dv.end()), dv.end());
  std::sort(df.begin(), df.end());
  df.erase(std::unique(df.begin(), df.end()), df.end());
  if (dv.size() * df.size() != rows.size()) {
    throw Error(ErrorKind::Io, "spectrum CSV does not form a full rectangular grid");
  }
  SpectrumMap m;
  m.dV_mV = dv;
  m.df_kHz = df;
  m.reference_kHz = reference_kHz;
  m.response.assign(rows.size(), 0.0);
  for (const auto& r : rows) {
    const auto i = static_cast<std::size_t>(std::lower_bound(dv.begin(), dv.end(), r[0]) - dv.begin());
    const auto j = static_cast<std::size_t>(std::lower_bound(df.begin(), df.end(), r[1]) - df.begin());
    m.response[i * df.size() + j] = r[2];
  }
  m.validate();
  return m;
}

}  // namespace ionmodes
