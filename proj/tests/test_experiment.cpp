#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "ionmodes/csv.hpp"
#include "ionmodes/dynamics.hpp"
#include "ionmodes/error.hpp"
#include "ionmodes/experiment.hpp"

using namespace ionmodes;

namespace {

CurvatureModel model() { return CurvatureModel::from_frequencies(3876.60, 3.299, -0.383, -1.202); }

void expect_probabilities(const FringeTrace& t) {
  for (double p : t.p_bright) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

double interference_dphi(const PathPair& pair, double T) {
  const auto delays = default_fringe_delays(model());
  const InterferenceResult r = run_interference(model(), pair, T, delays);
  return compare_fringes(r.enclosing, r.non_enclosing).dphi;
}

}  // namespace

TEST(Grid, UniformGrid) {
  const auto g = uniform_grid(0.0, 1.0, 5);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_DOUBLE_EQ(g[1], 0.25);
  const auto h = uniform_grid(0.0, 1.0, 4, false);
  EXPECT_DOUBLE_EQ(h.back(), 0.75);
}

TEST(Grid, DefaultFringeDelaysCoverTwoPeriods) {
  const auto d = default_fringe_delays(model());
  ASSERT_EQ(d.size(), 64u);
  const double period = 1.0 / (2.0 * std::sqrt(2.0) * 3.299);
  EXPECT_NEAR(d.back() + (d[1] - d[0]), 2.0 * period, 1e-12);
}

TEST(Interference, IdenticalPathsGiveZeroPhase) {
  const PathPair p = build_path_pair(model(), PathFamily::Canonical, 0.78, 128);
  const PathPair same{p.enclosing, p.enclosing};
  EXPECT_EQ(interference_dphi(same, 0.78), 0.0);
}

TEST(Interference, OutputsAreProbabilities) {
  const PathPair p = build_path_pair(model(), PathFamily::Canonical, 0.3, 96);
  const InterferenceResult r = run_interference(model(), p, 0.3, default_fringe_delays(model()), 0.8);
  expect_probabilities(r.enclosing);
  expect_probabilities(r.non_enclosing);
  EXPECT_LE(*std::max_element(r.enclosing.p_bright.begin(), r.enclosing.p_bright.end()), 0.8 + 1e-12);
  double sum = 0.0;
  for (double q : r.populations_enclosing) sum += q;
  EXPECT_NEAR(sum, 1.0, 1e-8);
  EXPECT_LT(r.norm_drift, 1e-8);
  EXPECT_EQ(r.enclosing.metadata.T_ms, 0.3);
}

TEST(Interference, RejectsBadInput) {
  const PathPair p = build_path_pair(model(), PathFamily::Canonical, 0.3, 32);
  const std::vector<double> none;
  EXPECT_THROW(run_interference(model(), p, 0.3, none), Error);
  const std::vector<double> d{0.0, 0.1};
  EXPECT_THROW(run_interference(model(), p, 0.3, d, 1.5), Error);
}

TEST(Interference, MirrorSymmetryControl) {
  for (double T : {0.78, 3.0}) {
    const PathPair p = build_path_pair(model(), PathFamily::Canonical, T, 200);
    const PathPair m{p.enclosing.mirrored(), p.non_enclosing.mirrored()};
    EXPECT_NEAR(interference_dphi(p, T), interference_dphi(m, T), 0.01 * kPi) << T;
  }
}

TEST(Interference, FringeFrequencyIsStartPointTone) {
  const double T = 12.0;
  const PathPair p = build_path_pair(model(), PathFamily::Canonical, T, 400);
  const InterferenceResult r = run_interference(model(), p, T, default_fringe_delays(model()));
  const FringeComparison c = compare_fringes(r.enclosing, r.non_enclosing);
  const double tone = 2.0 * std::sqrt(2.0) * 3.299;
  EXPECT_NEAR(c.fit_a.value("frequency"), tone, 0.01 * tone);
  EXPECT_NEAR(c.fit_b.value("frequency"), tone, 0.01 * tone);
  EXPECT_GT(c.dphi, 0.95 * kPi);
}

TEST(Interference, SuddenLimitSuppressesPhase) {
  EXPECT_LE(interference_dphi(build_path_pair(model(), PathFamily::Canonical, 0.1, 200), 0.1),
            0.3 * kPi);
}

TEST(Interference, LongTraversalApproachesPi) {
  FamilyOptions o;
  o.profile = SpeedProfile::LocalAdiabatic;
  const PathPair p = build_path_pair(model(), PathFamily::Canonical, 4.0, 400, o);
  EXPECT_NEAR(interference_dphi(p, 4.0), kPi, 0.02 * kPi);
}

TEST(Sweep, ContinuityAndFlags) {
  const std::vector<double> T{0.70, 0.75, 0.78, 0.80, 0.85};
  SweepOptions o;
  o.threads = 4;
  const auto pts = adiabaticity_sweep(model(), PathFamily::Canonical, T, {}, o);
  ASSERT_EQ(pts.size(), T.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(pts[i].T_ms, T[i]);
    EXPECT_FALSE(pts[i].flagged) << pts[i].note;
    EXPECT_GE(pts[i].dphi, 0.0);
    EXPECT_LE(pts[i].dphi, kPi);
    if (i > 0) EXPECT_LT(std::abs(pts[i].dphi - pts[i - 1].dphi), 0.2 * kPi);
  }
  EXPECT_THROW(adiabaticity_sweep(model(), PathFamily::Canonical, std::vector<double>{0.5, -1.0}),
               Error);
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  const std::vector<double> T{0.2, 0.4};
  SweepOptions one;
  SweepOptions many;
  many.threads = 3;
  const auto a = adiabaticity_sweep(model(), PathFamily::Canonical, T, {}, one);
  const auto b = adiabaticity_sweep(model(), PathFamily::Canonical, T, {}, many);
  for (std::size_t i = 0; i < T.size(); ++i) EXPECT_EQ(a[i].dphi, b[i].dphi);
}

TEST(Exchange, OriginSingleTone) {
  const auto d = uniform_grid(0.0, 1.0, 400);
  const FringeTrace t = exchange_trace(model(), {0.0, 0.0}, d);
  const double f = 3.0 * 3.299;
  double peak = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_NEAR(t.p_bright[i], 4.0 / 9.0 * (1.0 - std::cos(kTwoPi * f * d[i])), 1e-12);
    peak = std::max(peak, t.p_bright[i]);
  }
  EXPECT_NEAR(peak, 8.0 / 9.0, 1e-3);
  const FringeTrace half = exchange_trace(model(), {0.0, 0.0}, d, 0.5);
  EXPECT_NEAR(*std::max_element(half.p_bright.begin(), half.p_bright.end()), 4.0 / 9.0, 1e-3);
}

TEST(Exchange, DecoupledSiteCIsFlat) {
  // Equal shims on A and B detune C by (1 - alpha) s from both neighbours.
  const auto d = uniform_grid(0.0, 1.0, 200);
  const FringeTrace t = exchange_trace(model(), {60.0, 60.0}, d);
  EXPECT_LT(*std::max_element(t.p_bright.begin(), t.p_bright.end()), 0.01);
}

TEST(Exchange, LargeSiteAShimLeavesTwoSiteExchange) {
  // With only s_A large, B and C stay resonant and exchange at cos^2(2 pi delta_f t).
  const auto d = uniform_grid(0.0, 0.5, 100);
  const double dV = 1000.0;
  const FringeTrace t = exchange_trace(model(), ShimPoint::from_voltage(dV, 0.0, -1.202), d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_NEAR(t.p_bright[i], 1.0 - two_site_exchange(3.299, d[i]), 0.03);
  }
}

TEST(Spectrum, NoiselessArgmaxLiesOnModelCurve) {
  const FrequencyModel fm;
  const std::vector<double> dV{-2.0};
  const auto df = uniform_grid(-14.0, 22.0, 3601);
  const SpectrumMap m = synthetic_spectrum(fm, dV, df, 0.5, 0.0);
  std::size_t best = 0;
  for (std::size_t j = 0; j < df.size(); ++j) {
    if (m.at(0, j) > m.at(0, best)) best = j;
  }
  const auto f = mode_frequencies(fm, -2.0);
  double dist = 1e9;
  for (double fk : f) dist = std::min(dist, std::abs(df[best] - (fk - fm.f_R_kHz)));
  EXPECT_LT(dist, 0.25);
  EXPECT_EQ(m.reference_kHz, fm.f_R_kHz);
}

TEST(Spectrum, DegeneratePairMergesAtZeroVoltage) {
  const FrequencyModel fm;
  const std::vector<double> dV{0.0};
  const auto df = uniform_grid(-5.0, 5.0, 1001);
  const SpectrumMap m = synthetic_spectrum(fm, dV, df, 0.5, 0.0);
  std::size_t best = 0;
  for (std::size_t j = 0; j < df.size(); ++j) {
    if (m.at(0, j) > m.at(0, best)) best = j;
  }
  EXPECT_NEAR(df[best], 0.0, 1e-9);
  EXPECT_NEAR(m.at(0, best), 1.0, 1e-12);
}

TEST(Spectrum, LinewidthScalesFittedWidth) {
  const FrequencyModel fm;
  const std::vector<double> dV{-2.0};
  const double top = mode_frequencies(fm, -2.0)[2] - fm.f_R_kHz;
  double widths[2];
  int k = 0;
  for (double lw : {0.3, 0.6}) {
    const auto df = uniform_grid(top - 4.0 * lw, top + 4.0 * lw, 41);
    const SpectrumMap m = synthetic_spectrum(fm, dV, df, lw, 0.0);
    widths[k++] = fit_gaussian_peak(df, m.response).value("width");
  }
  EXPECT_NEAR(widths[1] / widths[0], 2.0, 1e-3);
}

TEST(Spectrum, NormalisedAndDeterministic) {
  const FrequencyModel fm;
  const auto dV = uniform_grid(-2.0, 2.0, 9);
  const auto df = uniform_grid(-10.0, 20.0, 61);
  const SpectrumMap a = synthetic_spectrum(fm, dV, df, 0.5, 0.05, 11);
  const SpectrumMap b = synthetic_spectrum(fm, dV, df, 0.5, 0.05, 11);
  EXPECT_EQ(a.response, b.response);
  EXPECT_EQ(*std::min_element(a.response.begin(), a.response.end()), 0.0);
  EXPECT_EQ(*std::max_element(a.response.begin(), a.response.end()), 1.0);
  EXPECT_THROW(synthetic_spectrum(fm, dV, df, 0.0), Error);
}

TEST(Shots, DeterministicAndExactAtBounds) {
  FringeTrace ideal;
  ideal.delays_ms = {0.0, 0.1, 0.2, 0.3};
  ideal.p_bright = {0.0, 0.3, 0.7, 1.0};
  ideal.std_errors.assign(4, 0.0);
  const FringeTrace a = sample_shots(ideal, 500, 9);
  const FringeTrace b = sample_shots(ideal, 500, 9);
  EXPECT_EQ(a.p_bright, b.p_bright);
  EXPECT_EQ(a.p_bright[0], 0.0);
  EXPECT_EQ(a.p_bright[3], 1.0);
  EXPECT_EQ(a.std_errors[0], 0.0);
  EXPECT_EQ(a.std_errors[3], 0.0);
  EXPECT_EQ(a.shots_per_point, 500u);
  for (std::size_t i = 1; i < 3; ++i) {
    const double q = a.p_bright[i];
    EXPECT_DOUBLE_EQ(a.std_errors[i], std::sqrt(q * (1.0 - q) / 500.0));
  }
  EXPECT_NE(sample_shots(ideal, 500, 10).p_bright, a.p_bright);
  EXPECT_THROW(sample_shots(ideal, 0, 1), Error);
}

TEST(Shots, ConcentrationAtMillionShots) {
  const FringeTrace ideal = exchange_trace(model(), {0.3, -0.4}, uniform_grid(0.0, 0.5, 64));
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const FringeTrace s = sample_shots(ideal, 1000000, seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < ideal.size(); ++i) {
      worst = std::max(worst, std::abs(s.p_bright[i] - ideal.p_bright[i]));
    }
    good += worst < 0.005;
  }
  EXPECT_GE(good, 99);
}

TEST(Csv, FringeRoundTrip) {
  const FringeTrace ideal = exchange_trace(model(), {0.3, -0.4}, uniform_grid(0.0, 0.5, 17));
  const FringeTrace s = sample_shots(ideal, 200, 3);
  const std::string text = to_csv(s);
  EXPECT_EQ(text.substr(0, text.find('\n')), "delay_ms,p_bright,std_err");
  const FringeTrace back = fringe_from_csv(text);
  EXPECT_EQ(back.delays_ms, s.delays_ms);
  EXPECT_EQ(back.p_bright, s.p_bright);
  EXPECT_EQ(back.std_errors, s.std_errors);
  EXPECT_EQ(to_csv(back), text);
  EXPECT_THROW(fringe_from_csv("delay,p\n0,1\n"), Error);
  EXPECT_THROW(fringe_from_csv("delay_ms,p_bright,std_err\n0,1.5,0\n"), Error);
}

TEST(Csv, SpectrumRoundTrip) {
  const FrequencyModel fm;
  const SpectrumMap m = synthetic_spectrum(fm, uniform_grid(-1.0, 1.0, 3), uniform_grid(-5.0, 5.0, 11),
                                           0.5, 0.05, 2);
  const std::string text = to_csv(m);
  EXPECT_EQ(text.substr(0, text.find('\n')), "dVA_mV,df_kHz,response");
  const SpectrumMap back = spectrum_from_csv(text, fm.f_R_kHz);
  EXPECT_EQ(back.dV_mV, m.dV_mV);
  EXPECT_EQ(back.df_kHz, m.df_kHz);
  EXPECT_EQ(back.response, m.response);
  EXPECT_THROW(spectrum_from_csv("dVA_mV,df_kHz,response\n0,0,0.1\n0,1,0.2\n1,0,0.3\n", 0.0), Error);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-9, 3876.6, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}
