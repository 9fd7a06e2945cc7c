#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "scsqkd/core.hpp"
#include "scsqkd/errors.hpp"
#include "scsqkd/quadrature.hpp"
#include "scsqkd/rng.hpp"

namespace scsqkd {

// Optical path description for one three-party link.
struct ChannelSpec {
  double len_ac_km = 0.0;
  double len_bc_km = 0.0;
  double atten_db_per_km = 0.168;
  double extra_loss_a_db = 0.0;  // Charlie-side component losses, Alice arm
  double extra_loss_b_db = 0.0;
  double monitor_tap_fraction = 0.10;  // diverted to the polarization monitor port
  double phase_sigma_rad = 0.17;       // residual phase-mismatch std

  void validate() const {
    if (len_ac_km < 0.0 || len_bc_km < 0.0) throw invariant_error("ChannelSpec: negative length");
    if (atten_db_per_km < 0.0) throw invariant_error("ChannelSpec: negative attenuation");
    if (!(monitor_tap_fraction >= 0.0 && monitor_tap_fraction < 1.0))
      throw invariant_error("ChannelSpec: monitor_tap_fraction outside [0, 1)");
    if (phase_sigma_rad < 0.0) throw invariant_error("ChannelSpec: negative phase sigma");
  }
};

struct DetectorSpec {
  double efficiency = 1.0;
  double dark_rate_hz = 0.0;
  double window_retention = 1.0;  // valid-time-window filter acceptance

  void validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
      throw invariant_error("DetectorSpec: efficiency outside [0, 1]");
    if (dark_rate_hz < 0.0) throw invariant_error("DetectorSpec: negative dark rate");
    if (!(window_retention >= 0.0 && window_retention <= 1.0))
      throw invariant_error("DetectorSpec: window_retention outside [0, 1]");
  }
};

// Pulse-train timing: reference pulses head each cycle, signal pulses fill the
// remainder.
struct FrameLayout {
  double cycle_ns = 100.0;
  int ref_pulses = 15;
  int signal_pulses = 10;
  double pulse_width_ps = 700.0;
  double system_rate_mhz = 250.0;
  double effective_rate_mhz = 100.0;

  void validate() const {
    if (cycle_ns <= 0.0 || ref_pulses < 0 || signal_pulses < 1 || pulse_width_ps <= 0.0)
      throw invariant_error("FrameLayout: malformed timing");
    const double eff = signal_pulses / cycle_ns * 1e3;
    if (std::abs(eff - effective_rate_mhz) > 1e-9 * effective_rate_mhz)
      throw invariant_error("FrameLayout: signal_pulses/cycle does not give the effective rate");
    const double sys = (ref_pulses + signal_pulses) / cycle_ns * 1e3;
    if (std::abs(sys - system_rate_mhz) > 1e-9 * system_rate_mhz)
      throw invariant_error("FrameLayout: pulse count/cycle does not give the system rate");
  }

  // Dark-count exposure per signal window: one pulse-width gate.
  double dark_gate_seconds() const { return pulse_width_ps * 1e-12; }
};

enum class Arm { alice, bob };

// dB equivalent of a chain of component efficiencies.
inline double component_loss_db(std::initializer_list<double> efficiencies) {
  double product = 1.0;
  for (double e : efficiencies) product *= e;
  return -10.0 * std::log10(product);
}

// End-to-end transmittance of one arm: fibre attenuation, Charlie-side
// component losses, the monitoring tap, detection efficiency, and the
// valid-window filter.
inline double arm_transmittance(const ChannelSpec& channel, const DetectorSpec& detector,
                                Arm arm) {
  channel.validate();
  detector.validate();
  const double fibre_db = (arm == Arm::alice ? channel.len_ac_km : channel.len_bc_km) *
                          channel.atten_db_per_km;
  const double extra_db = arm == Arm::alice ? channel.extra_loss_a_db : channel.extra_loss_b_db;
  return std::pow(10.0, -(fibre_db + extra_db) / 10.0) * (1.0 - channel.monitor_tap_fraction) *
         detector.efficiency * detector.window_retention;
}

// Mean photon numbers at the interferometer output ports for arriving
// intensities xa, xb and phase mismatch delta_phi. The 50:50 split lives here;
// beam-splitter insertion excess belongs in the arm losses.
struct PortIntensities {
  double destructive = 0.0;
  double constructive = 0.0;
};

inline PortIntensities port_intensities(double xa, double xb, double delta_phi) {
  if (xa < 0.0 || xb < 0.0) throw std::domain_error("port_intensities: negative intensity");
  const double half_sum = 0.5 * (xa + xb);
  const double cross = std::sqrt(xa * xb) * std::cos(delta_phi);
  return {half_sum - cross, half_sum + cross};
}

struct PortClickProbabilities {
  double p_ch0 = 0.0;
  double p_ch1 = 0.0;
};

// Poissonian threshold detection: p = 1 - (1 - p_dark) e^{-I} per port. The
// destructive port maps to the effective channel (ch0 by default), matching
// the core-model detector convention.
inline PortClickProbabilities click_probabilities(const ProtocolParams& params, double eta_a,
                                                  double eta_b, bool alice_sends, bool bob_sends,
                                                  double delta_phi, double dark_per_window,
                                                  int destructive_channel = 0) {
  if (eta_a < 0.0 || eta_b < 0.0)
    throw std::domain_error("click_probabilities: negative transmittance");
  if (!(dark_per_window >= 0.0 && dark_per_window <= 1.0))
    throw std::domain_error("click_probabilities: dark probability outside [0, 1]");
  const double xa = alice_sends ? eta_a * params.mu_a : 0.0;
  const double xb = bob_sends ? eta_b * params.mu_b : 0.0;
  const PortIntensities ports = port_intensities(xa, xb, delta_phi);
  const auto click = [dark_per_window](double intensity) {
    return dark_per_window + (1.0 - dark_per_window) * (-std::expm1(-intensity));
  };
  PortClickProbabilities out;
  if (destructive_channel == 0) {
    out.p_ch0 = click(ports.destructive);
    out.p_ch1 = click(ports.constructive);
  } else {
    out.p_ch0 = click(ports.constructive);
    out.p_ch1 = click(ports.destructive);
  }
  return out;
}

namespace detail {

// The simulator tolerates the degenerate send probabilities 0 and 1 that the
// full protocol validation rejects.
inline void validate_source(const ProtocolParams& params) {
  if (!(params.p_send >= 0.0 && params.p_send <= 1.0))
    throw invariant_error("simulator: p_send outside [0, 1]");
  if (params.mu_a < 0.0 || params.mu_b < 0.0) throw invariant_error("simulator: negative intensity");
}

inline DetectorSpec pooled_detector(const std::array<DetectorSpec, 2>& detectors) {
  detectors[0].validate();
  detectors[1].validate();
  return {0.5 * (detectors[0].efficiency + detectors[1].efficiency),
          0.5 * (detectors[0].dark_rate_hz + detectors[1].dark_rate_hz),
          0.5 * (detectors[0].window_retention + detectors[1].window_retention)};
}

inline double cell_probability(const ProtocolParams& params, int a, int b) {
  return (a == 1 ? params.p_send : params.p_vac()) * (b == 1 ? params.p_send : params.p_vac());
}

}  // namespace detail

// Expected count table with exact real values alongside the rounded integer
// counts. Sent cells are rounded by largest remainder so they sum exactly to
// n_windows.
struct ExpectedCountTable {
  CountTable counts;
  std::array<std::array<double, 2>, 2> sent_mean{};
  std::array<std::array<std::array<double, 2>, 2>, 2> detected_mean{};
};

inline ExpectedCountTable expected_count_table(const ProtocolParams& params,
                                               const ChannelSpec& channel,
                                               const std::array<DetectorSpec, 2>& detectors,
                                               const FrameLayout& frame, int quadrature_order = 24) {
  detail::validate_source(params);
  if (params.n_windows < 1) throw invariant_error("expected_count_table: n_windows must be >= 1");
  channel.validate();
  frame.validate();
  if (quadrature_order < 8)
    throw std::domain_error("expected_count_table: quadrature order must be >= 8");
  const DetectorSpec pooled = detail::pooled_detector(detectors);
  const double eta_a = arm_transmittance(channel, pooled, Arm::alice);
  const double eta_b = arm_transmittance(channel, pooled, Arm::bob);
  const double dark = pooled.dark_rate_hz * frame.dark_gate_seconds();

  ExpectedCountTable out;

  // largest-remainder rounding of the sent cells
  std::uint64_t assigned = 0;
  double best_frac = -1.0;
  int best_a = 0, best_b = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double mean = static_cast<double>(params.n_windows) *
                          detail::cell_probability(params, a, b);
      out.sent_mean[a][b] = mean;
      const auto floor_count = static_cast<std::uint64_t>(std::floor(mean));
      out.counts.sent[a][b] = floor_count;
      assigned += floor_count;
      const double frac = mean - std::floor(mean);
      if (frac > best_frac) {
        best_frac = frac;
        best_a = a;
        best_b = b;
      }
    }
  if (assigned > params.n_windows)
    throw invariant_error("expected_count_table: sent-cell rounding overshot n_windows");
  out.counts.sent[best_a][best_b] += params.n_windows - assigned;

  const QuadratureRule rule = gauss_hermite(quadrature_order);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ch = 0; ch < 2; ++ch) {
        const auto prob = [&](double phi) {
          const PortClickProbabilities p =
              click_probabilities(params, eta_a, eta_b, a == 1, b == 1, phi, dark);
          return ch == 0 ? p.p_ch0 : p.p_ch1;
        };
        const double mean_prob = channel.phase_sigma_rad == 0.0
                                     ? prob(0.0)
                                     : gaussian_expectation(rule, channel.phase_sigma_rad, prob);
        out.detected_mean[a][b][ch] = out.sent_mean[a][b] * mean_prob;
        const double rounded =
            std::round(static_cast<double>(out.counts.sent[a][b]) * mean_prob);
        out.counts.detected[a][b][ch] =
            std::min(static_cast<std::uint64_t>(rounded), out.counts.sent[a][b]);
      }
  out.counts.validate(params.n_windows);
  return out;
}

// Monte Carlo count table: per-window Bernoulli send choices, one phase draw,
// and independent per-port Bernoulli clicks. Windows are processed in fixed
// chunks with split substreams, so the result is deterministic per seed and
// chunks could be farmed out to workers and merged by summation.
inline CountTable simulate_count_table_mc(const ProtocolParams& params, const ChannelSpec& channel,
                                          const std::array<DetectorSpec, 2>& detectors,
                                          const FrameLayout& frame, std::uint64_t n_windows_mc,
                                          std::uint64_t seed) {
  detail::validate_source(params);
  channel.validate();
  frame.validate();
  if (n_windows_mc < 1) throw std::domain_error("simulate_count_table_mc: need >= 1 window");
  const DetectorSpec pooled = detail::pooled_detector(detectors);
  const double eta_a = arm_transmittance(channel, pooled, Arm::alice);
  const double eta_b = arm_transmittance(channel, pooled, Arm::bob);
  const double dark = pooled.dark_rate_hz * frame.dark_gate_seconds();

  // click probabilities only depend on the (a, b) cell and the phase draw
  std::array<std::array<double, 2>, 2> xa{}, xb{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      xa[a][b] = a == 1 ? eta_a * params.mu_a : 0.0;
      xb[a][b] = b == 1 ? eta_b * params.mu_b : 0.0;
    }

  CountTable counts;
  constexpr std::uint64_t kChunk = 1 << 20;
  const std::uint64_t n_chunks = (n_windows_mc + kChunk - 1) / kChunk;
  for (std::uint64_t chunk = 0; chunk < n_chunks; ++chunk) {
    Rng rng = Rng::substream(seed, chunk);
    const std::uint64_t first = chunk * kChunk;
    const std::uint64_t last = std::min(first + kChunk, n_windows_mc);
    for (std::uint64_t w = first; w < last; ++w) {
      const int a = rng.bernoulli(params.p_send) ? 1 : 0;
      const int b = rng.bernoulli(params.p_send) ? 1 : 0;
      const double phi = channel.phase_sigma_rad * rng.normal();
      counts.sent[a][b] += 1;
      const PortIntensities ports = port_intensities(xa[a][b], xb[a][b], phi);
      const double p0 = dark + (1.0 - dark) * (-std::expm1(-ports.destructive));
      const double p1 = dark + (1.0 - dark) * (-std::expm1(-ports.constructive));
      if (rng.bernoulli(p0)) counts.detected[a][b][0] += 1;
      if (rng.bernoulli(p1)) counts.detected[a][b][1] += 1;
    }
  }
  counts.validate(n_windows_mc);
  return counts;
}

// --- Paper operating points -------------------------------------------------

// Component efficiencies at Charlie's station per input arm. The published
// 45.7%/45.9% beam-splitter figures include the 50:50 split, which the
// interference model carries explicitly, so only the insertion excess enters
// the arm loss.
inline double alice_component_loss_db() { return component_loss_db({0.927, 2.0 * 0.457}); }
inline double bob_component_loss_db() { return component_loss_db({0.921, 0.496, 2.0 * 0.459}); }

// Effective interference-noise spread used by the embedded scenarios: one
// global value calibrated against the published 50.5 km QBER. The closed-loop
// feedback residual alone (0.17 rad) underpredicts the measured error rates.
inline constexpr double kScenarioPhaseSigma = 0.32;

// Calibrated signal-intensity upper-bound ratio (mean + 4 sigma).
inline constexpr double kIntensityUpperRatio = 1.0215;

// Extinction-ratio floor between sending and not-sending, dB.
inline constexpr double kExtinctionFloorDb = 70.0;

inline double vacuum_intensity_bound(double mu_a_up, double mu_b_up,
                                     double extinction_db = kExtinctionFloorDb) {
  return std::max(mu_a_up, mu_b_up) * std::pow(10.0, -extinction_db / 10.0);
}

// Fills the intensity bounds of a parameter set from the calibration constants.
inline void apply_intensity_bounds(ProtocolParams& params,
                                   double upper_ratio = kIntensityUpperRatio,
                                   double extinction_db = kExtinctionFloorDb) {
  params.mu_a_up = params.mu_a * upper_ratio;
  params.mu_b_up = params.mu_b * upper_ratio;
  params.mu_vac_up = vacuum_intensity_bound(params.mu_a_up, params.mu_b_up, extinction_db);
}

struct SimulationScenario {
  std::string name;
  ChannelSpec channel;
  std::array<DetectorSpec, 2> detectors;
  FrameLayout frame;
  ProtocolParams params;
};

inline std::vector<SimulationScenario> paper_scenarios() {
  const std::array<DetectorSpec, 2> snspds{{{0.682, 8.4, 1.0}, {0.705, 7.5, 1.0}}};
  const auto make = [&](std::string name, double len_ac, double len_bc, double balance_db,
                        double retention, std::uint64_t n_windows, double mu_a, double mu_b) {
    SimulationScenario s;
    s.name = std::move(name);
    s.channel.len_ac_km = len_ac;
    s.channel.len_bc_km = len_bc;
    s.channel.extra_loss_a_db = alice_component_loss_db();
    s.channel.extra_loss_b_db = bob_component_loss_db() + balance_db;
    s.channel.phase_sigma_rad = kScenarioPhaseSigma;
    s.detectors = snspds;
    s.detectors[0].window_retention = retention;
    s.detectors[1].window_retention = retention;
    s.params.n_windows = n_windows;
    s.params.p_send = 0.2;
    s.params.mu_a = mu_a;
    s.params.mu_b = mu_b;
    apply_intensity_bounds(s.params);
    return s;
  };
  return {
      make("paper_0km", 0.0, 0.0, 0.0, 1.0, 363000000000ULL, 0.0174, 0.0348),
      make("paper_25p3km", 25.3, 0.0, 1.2, 1.0, 363000000000ULL, 0.0137, 0.0137),
      make("paper_50p5km", 25.3, 25.2, 0.0, 1.0, 363000000000ULL, 0.0061, 0.0122),
      make("paper_75p7km", 50.5, 25.2, 1.2, 1.0, 363000000000ULL, 0.0045, 0.0045),
      make("paper_101p1km", 50.5, 50.6, 0.0, 0.79, 1126000000000ULL, 0.0019, 0.0038),
  };
}

inline SimulationScenario paper_scenario(std::string_view name) {
  for (auto& s : paper_scenarios())
    if (s.name == name) return s;
  throw parse_error("unknown simulation scenario '" + std::string(name) + "'");
}

}  // namespace scsqkd
