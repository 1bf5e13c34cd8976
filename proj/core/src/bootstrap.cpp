#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "ionmodes/error.hpp"
#include "ionmodes/fit.hpp"
#include "ionmodes/random.hpp"

namespace ionmodes {
namespace {

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace

BootstrapResult bootstrap_ci(std::size_t n_points,
                             const std::function<FitResult(std::span<const std::size_t>)>& fitter,
                             std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (trials < 100) throw Error(ErrorKind::InvalidArgument, "bootstrap needs at least 100 trials");
  if (n_points == 0) throw Error(ErrorKind::InvalidArgument, "bootstrap input is empty");

  std::vector<std::optional<FitResult>> fits(trials);
  auto worker = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx(n_points);
    for (std::size_t t = begin; t < end; ++t) {
      std::mt19937_64 rng(derive_seed(seed, t));
      std::uniform_int_distribution<std::size_t> pick(0, n_points - 1);
      for (std::size_t& i : idx) i = pick(rng);
      std::sort(idx.begin(), idx.end());
      try {
        FitResult f = fitter(idx);
        if (f.converged) fits[t] = std::move(f);
      } catch (const Error&) {
      }
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
  if (nt == 1) {
    worker(0, trials);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < nt; ++k) {
      pool.emplace_back(worker, trials * k / nt, trials * (k + 1) / nt);
    }
  }

  BootstrapResult out;
  out.trials = trials;
  std::map<std::string, std::vector<double>> samples;
  for (const auto& f : fits) {
    if (!f) {
      ++out.failures;
      continue;
    }
    for (std::size_t i = 0; i < f->names.size(); ++i) samples[f->names[i]].push_back(f->values[i]);
  }
  for (auto& [name, v] : samples) {
    std::sort(v.begin(), v.end());
    out.ci68[name] = {percentile(v, 0.16), percentile(v, 0.84)};
    out.ci95[name] = {percentile(v, 0.025), percentile(v, 0.975)};
  }
  if (out.failures * 10 > trials) {
    out.degraded = true;
    out.warnings.push_back("degraded CI: " + std::to_string(out.failures) + " of " +
                           std::to_string(trials) + " refits failed");
  }
  return out;
}

FringeTrace resample(const FringeTrace& trace, std::span<const std::size_t> indices) {
  FringeTrace r;
  r.shots_per_point = trace.shots_per_point;
  r.metadata = trace.metadata;
  for (std::size_t i : indices) {
    r.delays_ms.push_back(trace.delays_ms.at(i));
    r.p_bright.push_back(trace.p_bright.at(i));
    r.std_errors.push_back(i < trace.std_errors.size() ? trace.std_errors[i] : 0.0);
  }
  return r;
}

std::string fit_report_json(const FitResult& fit, const BootstrapResult* bootstrap) {
  nlohmann::ordered_json j;
  j["parameters"] = nlohmann::ordered_json::object();
  j["uncertainties"] = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    j["parameters"][fit.names[i]] = fit.values[i];
    j["uncertainties"][fit.names[i]] = fit.uncertainties[i];
  }
  j["ci68"] = nlohmann::ordered_json::object();
  j["ci95"] = nlohmann::ordered_json::object();
  if (bootstrap != nullptr) {
    for (const auto& [name, iv] : bootstrap->ci68) j["ci68"][name] = {iv.lo, iv.hi};
    for (const auto& [name, iv] : bootstrap->ci95) j["ci95"][name] = {iv.lo, iv.hi};
    if (!bootstrap->warnings.empty()) j["warnings"] = bootstrap->warnings;
  }
  j["converged"] = fit.converged;
  j["residual"] = fit.residual_norm;
  return j.dump(2);
}

}  // namespace ionmodes
