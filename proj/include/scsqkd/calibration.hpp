#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "scsqkd/errors.hpp"

namespace scsqkd {

struct ExtinctionResult {
  double ratio_db = 0.0;
  bool vacuum_floor_applied = false;  // zero vacuum counts: value is a lower bound
};

// Extinction ratio between windowed signal and vacuum counts,
// 10 log10(n_signal * factor / n_vacuum), with factor undoing the
// signal-to-vacuum sequence ratio. Dark counts are not subtracted unless a
// dark estimate is passed explicitly.
inline ExtinctionResult extinction_ratio_db(double n_signal, double n_vacuum, double factor = 4.0,
                                            double dark_counts = 0.0) {
  if (!(n_signal > 0.0)) throw std::domain_error("extinction_ratio_db: signal counts must be > 0");
  if (n_vacuum < 0.0 || factor <= 0.0 || dark_counts < 0.0)
    throw std::domain_error("extinction_ratio_db: malformed inputs");
  ExtinctionResult out;
  double sig = std::max(n_signal - dark_counts, 1.0);
  double vac = n_vacuum - dark_counts;
  if (vac <= 0.0) {
    vac = 1.0;
    out.vacuum_floor_applied = true;
  }
  out.ratio_db = 10.0 * std::log10(sig * factor / vac);
  return out;
}

struct IntensityStats {
  double mean = 0.0;
  double stddev = 0.0;      // unbiased sample standard deviation
  double mu_up_ratio = 1.0;  // 1 + k sigma / mean
};

inline double intensity_upper_ratio(double mean, double stddev, double k_sigma) {
  if (!(mean > 0.0)) throw std::domain_error("intensity_upper_ratio: mean must be > 0");
  if (stddev < 0.0 || k_sigma < 0.0)
    throw std::domain_error("intensity_upper_ratio: negative spread or k");
  return 1.0 + k_sigma * stddev / mean;
}

// Signal-intensity fluctuation statistics from per-pulse readings; the ratio
// bounds the source intensity as mean * mu_up_ratio.
inline IntensityStats intensity_upper_bound(std::span<const double> samples, double k_sigma) {
  if (samples.size() < 2)
    throw std::domain_error("intensity_upper_bound: need at least 2 samples");
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double stddev = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  IntensityStats out;
  out.mean = mean;
  out.stddev = stddev;
  out.mu_up_ratio = intensity_upper_ratio(mean, stddev, k_sigma);
  return out;
}

// Two-pulse pattern counts: first letter is the predecessor state, second the
// measured pulse (V = vacuum, S = signal).
struct PatternCounts {
  std::uint64_t sent_vv = 0, sent_vs = 0, sent_sv = 0, sent_ss = 0;
  std::uint64_t det_vv = 0, det_vs = 0, det_sv = 0, det_ss = 0;
};

struct PatterningRates {
  double r_vv = 0.0, r_vs = 0.0, r_sv = 0.0, r_ss = 0.0;  // normalized click rates
  double rel_diff_vs_ss = 0.0;  // |R_VS - R_SS| / R_SS
  double rel_diff_sv_vv = 0.0;  // |R_SV - R_VV| / R_VV
};

inline PatterningRates patterning_rates(const PatternCounts& counts) {
  if (counts.sent_vv == 0 || counts.sent_vs == 0 || counts.sent_sv == 0 || counts.sent_ss == 0)
    throw std::domain_error("patterning_rates: zero sent count for some pattern");
  PatterningRates out;
  out.r_vv = static_cast<double>(counts.det_vv) / static_cast<double>(counts.sent_vv);
  out.r_vs = static_cast<double>(counts.det_vs) / static_cast<double>(counts.sent_vs);
  out.r_sv = static_cast<double>(counts.det_sv) / static_cast<double>(counts.sent_sv);
  out.r_ss = static_cast<double>(counts.det_ss) / static_cast<double>(counts.sent_ss);
  if (out.r_ss == 0.0 || out.r_vv == 0.0)
    throw std::domain_error("patterning_rates: zero reference rate");
  out.rel_diff_vs_ss = std::abs(out.r_vs - out.r_ss) / out.r_ss;
  out.rel_diff_sv_vv = std::abs(out.r_sv - out.r_vv) / out.r_vv;
  return out;
}

}  // namespace scsqkd
