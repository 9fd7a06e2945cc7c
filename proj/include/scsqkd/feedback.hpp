#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "scsqkd/errors.hpp"
#include "scsqkd/rng.hpp"

namespace scsqkd {

// Relative laser-phase random walk between the two independent sources.
struct DriftProcess {
  double rate_rad_per_sqrt_us = 0.0168;

  void validate() const {
    if (rate_rad_per_sqrt_us < 0.0) throw invariant_error("DriftProcess: negative drift rate");
  }
};

struct DriftState {
  double phase_rad = 0.0;  // unwrapped
};

inline double step_drift(DriftState& state, const DriftProcess& process, double dt_us, Rng& rng) {
  if (!(dt_us > 0.0)) throw std::domain_error("step_drift: dt must be > 0");
  state.phase_rad += process.rate_rad_per_sqrt_us * std::sqrt(dt_us) * rng.normal();
  return state.phase_rad;
}

struct SenseCounts {
  std::uint64_t d0 = 0;
  std::uint64_t d1 = 0;
};

// Reference-light interference counts over one accumulation window:
// E[D0] = Lambda cos^2(phi/2), E[D1] = Lambda sin^2(phi/2).
inline SenseCounts sense_counts(double phase_rad, double ref_rate_mcps, double window_us,
                                Rng& rng) {
  if (ref_rate_mcps < 0.0 || window_us < 0.0)
    throw std::domain_error("sense_counts: negative rate or window");
  const double lambda = ref_rate_mcps * window_us;
  const double c = std::cos(phase_rad / 2.0);
  const double split = c * c;
  return {rng.poisson(lambda * split), rng.poisson(lambda * (1.0 - split))};
}

// FPGA controller configuration. Gains are in output volts (after the 2x
// amplifier) per unit R deviation; they are negative because R falls as the
// phase rises at the offset lock point. Defaults were fixed by a grid search
// at the 0.0168 rad/sqrt(us) drift rate.
struct ControllerConfig {
  double kp = 0.0;    // proportional action only amplifies shot noise here
  double ki = -0.08;  // per microsecond of accumulated error
  double kd = 0.0;
  double integration_window_us = 4.0;
  double pid_cycle_ns = 110.0;
  double output_update_us = 1.0;
  // Setpoint for R = D0/(D0+D1). 0.9 leaves 10% of the reference counts on
  // the monitor port D1 and keeps a usable slope; 1.0 would be the exact null
  // where dR/dphi vanishes.
  double target_r = 0.9;
  double ref_rate_mcps = 2.5;

  void validate() const {
    if (!(std::isfinite(kp) && std::isfinite(ki) && std::isfinite(kd)))
      throw invariant_error("ControllerConfig: gains must be finite");
    if (!(integration_window_us >= 2.0 && integration_window_us <= 10.0))
      throw invariant_error("ControllerConfig: integration window outside [2, 10] us");
    if (!(target_r >= 0.0 && target_r <= 1.0))
      throw invariant_error("ControllerConfig: target_r outside [0, 1]");
    if (ref_rate_mcps < 0.0) throw invariant_error("ControllerConfig: negative reference rate");
  }

  // Phase the loop locks to: R = cos^2(phi/2) = target_r.
  double lock_phase_rad() const { return 2.0 * std::acos(std::sqrt(target_r)); }
};

// DAC/amplifier/phase-modulator chain.
struct HardwareModel {
  double v_pi = 3.05;
  int dac_bits = 16;
  double dac_range_v = 5.0;         // +-5 V at the DAC pins
  double amp_gain = 2.0;
  double fold_threshold_v = 10.0;   // +-10 V after amplification
  double fold_step_v = 6.1;         // = 2 v_pi, a 2*pi phase step

  void validate() const {
    if (std::abs(fold_step_v - 2.0 * v_pi) > 1e-12)
      throw invariant_error("HardwareModel: fold step must equal 2 v_pi");
    if (amp_gain * dac_range_v < fold_threshold_v)
      throw invariant_error("HardwareModel: amplified range does not cover the fold threshold");
    if (dac_bits < 1 || dac_bits > 24) throw invariant_error("HardwareModel: dac_bits out of range");
  }

  double dac_lsb_v() const {
    return 2.0 * dac_range_v / static_cast<double>(1ULL << dac_bits);
  }
  double output_lsb_v() const { return amp_gain * dac_lsb_v(); }
  double phase_shift_rad(double volts) const { return M_PI * volts / v_pi; }
};

// Folds a command into the linear drive range by 2*pi-equivalent voltage steps.
inline double fold_voltage(double volts, const HardwareModel& hw) {
  while (volts > hw.fold_threshold_v) volts -= hw.fold_step_v;
  while (volts < -hw.fold_threshold_v) volts += hw.fold_step_v;
  return volts;
}

struct PidState {
  double integral = 0.0;
  double last_error = 0.0;
  bool has_last = false;
  double command_v = 0.0;
};

// One controller update from an observed R value: positional PID, then the
// fold into the linear regime, then quantization to the amplified DAC grid.
inline double pid_step(double r_observed, PidState& state, const ControllerConfig& cfg,
                       const HardwareModel& hw) {
  if (!(r_observed >= 0.0 && r_observed <= 1.0))
    throw std::domain_error("pid_step: R outside [0, 1]");
  const double dt = cfg.integration_window_us;
  const double error = cfg.target_r - r_observed;
  state.integral += error * dt;
  const double derivative = state.has_last ? (error - state.last_error) / dt : 0.0;
  state.last_error = error;
  state.has_last = true;
  const double raw = cfg.kp * error + cfg.ki * state.integral + cfg.kd * derivative;
  const double folded = fold_voltage(raw, hw);
  const double lsb = hw.output_lsb_v();
  state.command_v = std::round(folded / lsb) * lsb;
  return state.command_v;
}

struct PhaseSample {
  double t_us = 0.0;
  double channel_phase_rad = 0.0;       // unwrapped drift phase
  double controller_voltage_v = 0.0;
  std::uint32_t d0 = 0;                 // reference counts in this microsecond
  std::uint32_t d1 = 0;
  double residual_phase_rad = 0.0;      // folded total phase minus the lock point
};

struct PhaseTrace {
  std::vector<PhaseSample> samples;
};

struct LoopResult {
  PhaseTrace trace;
  double lock_phase_rad = 0.0;
  double residual_std_rad = 0.0;   // over the folded phase, after warm-up
  double residual_mean_rad = 0.0;
};

// Interference power only reveals |cos(phi)|-compatible phase: fold to [0, pi].
inline double folded_phase(double phase_rad) { return std::acos(std::cos(phase_rad)); }

// Drift + sensing + PID loop at 1 us output resolution. Corrections are
// computed once per accumulation window and applied at the next output update;
// with the feedback off the modulator stays at 0 V and the trace records the
// free-running walk.
inline LoopResult run_loop(const DriftProcess& process, const ControllerConfig& cfg,
                           const HardwareModel& hw, double duration_ms, bool feedback_on,
                           std::uint64_t seed, double warmup_ms = 1.0) {
  process.validate();
  cfg.validate();
  hw.validate();
  if (!(duration_ms > 0.0)) throw std::domain_error("run_loop: duration must be > 0");

  Rng rng(seed);
  DriftState drift;
  PidState pid;
  LoopResult result;
  result.lock_phase_rad = cfg.lock_phase_rad();

  const auto n_steps = static_cast<std::uint64_t>(std::llround(duration_ms * 1e3));
  result.trace.samples.reserve(n_steps);
  double v_out = 0.0;
  std::uint64_t window_d0 = 0, window_d1 = 0;
  double window_elapsed_us = 0.0;

  double sum = 0.0, sum_sq = 0.0;
  std::uint64_t tail_count = 0;
  const double warmup_us = warmup_ms * 1e3;

  for (std::uint64_t i = 0; i < n_steps; ++i) {
    step_drift(drift, process, 1.0, rng);
    const double total = drift.phase_rad + hw.phase_shift_rad(v_out);
    const SenseCounts counts = sense_counts(total, cfg.ref_rate_mcps, 1.0, rng);
    window_d0 += counts.d0;
    window_d1 += counts.d1;
    window_elapsed_us += 1.0;

    const double t_us = static_cast<double>(i + 1);
    const double folded = folded_phase(total);
    result.trace.samples.push_back({t_us, drift.phase_rad, v_out,
                                    static_cast<std::uint32_t>(counts.d0),
                                    static_cast<std::uint32_t>(counts.d1),
                                    folded - result.lock_phase_rad});
    if (t_us > warmup_us) {
      sum += folded;
      sum_sq += folded * folded;
      ++tail_count;
    }

    if (feedback_on && window_elapsed_us >= cfg.integration_window_us) {
      const std::uint64_t window_total = window_d0 + window_d1;
      if (window_total > 0) {
        const double r = static_cast<double>(window_d0) / static_cast<double>(window_total);
        v_out = pid_step(r, pid, cfg, hw);
      }
      window_d0 = window_d1 = 0;
      window_elapsed_us = 0.0;
    }
  }

  if (tail_count > 0) {
    const double mean = sum / static_cast<double>(tail_count);
    const double var = std::max(sum_sq / static_cast<double>(tail_count) - mean * mean, 0.0);
    result.residual_mean_rad = mean - result.lock_phase_rad;
    result.residual_std_rad = std::sqrt(var);
  }
  return result;
}

// Delimited trace export for plotting.
inline std::string trace_to_tsv(const PhaseTrace& trace) {
  std::string out = "t_us\tchannel_phase_rad\tcontroller_voltage_v\td0\td1\tresidual_phase_rad\n";
  char buf[160];
  for (const PhaseSample& s : trace.samples) {
    std::snprintf(buf, sizeof buf, "%.1f\t%.9g\t%.9g\t%u\t%u\t%.9g\n", s.t_us,
                  s.channel_phase_rad, s.controller_voltage_v, s.d0, s.d1, s.residual_phase_rad);
    out += buf;
  }
  return out;
}

}  // namespace scsqkd
