#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "scsqkd/errors.hpp"

namespace scsqkd {

// Protocol-level parameters of one experimental run (Table-I shape).
struct ProtocolParams {
  std::uint64_t n_windows = 0;  // signal time windows N
  double p_send = 0.2;          // probability of committing bit "send" per window
  double mu_a = 0.0;            // mean coherent intensity, Alice (photons/pulse)
  double mu_b = 0.0;
  double mu_a_up = 0.0;  // calibrated intensity upper bounds
  double mu_b_up = 0.0;
  double mu_vac_up = 0.0;  // vacuum-intensity upper bound (finite extinction)
  double ec_inefficiency = 1.16;
  int dimension_d = 8;               // local-state dimension
  double effective_rate_mhz = 100.0;  // signal windows per second, for bps reporting

  double p_vac() const { return 1.0 - p_send; }

  void validate() const {
    if (n_windows < 1) throw invariant_error("ProtocolParams: n_windows must be >= 1");
    if (!(p_send > 0.0 && p_send < 1.0))
      throw invariant_error("ProtocolParams: p_send must lie in (0, 1)");
    if (mu_a < 0.0 || mu_b < 0.0) throw invariant_error("ProtocolParams: negative intensity");
    if (mu_a > mu_a_up) throw invariant_error("ProtocolParams: mu_a exceeds mu_a_up");
    if (mu_b > mu_b_up) throw invariant_error("ProtocolParams: mu_b exceeds mu_b_up");
    if (mu_vac_up < 0.0 || mu_vac_up > std::min(mu_a_up, mu_b_up))
      throw invariant_error("ProtocolParams: mu_vac_up outside [0, min(mu_a_up, mu_b_up)]");
    if (ec_inefficiency < 1.0) throw invariant_error("ProtocolParams: ec_inefficiency < 1");
    if (dimension_d < 2) throw invariant_error("ProtocolParams: dimension_d < 2");
    if (!(effective_rate_mhz > 0.0))
      throw invariant_error("ProtocolParams: effective_rate_mhz must be > 0");
  }
};

// Sent/detected counts per joint send choice and detector channel
// (Table-IV shape). Index convention: [a][b] with a = Alice's choice,
// b = Bob's choice, 1 = send; ch in {0, 1}.
struct CountTable {
  std::array<std::array<std::uint64_t, 2>, 2> sent{};
  std::array<std::array<std::array<std::uint64_t, 2>, 2>, 2> detected{};

  friend bool operator==(const CountTable&, const CountTable&) = default;

  std::uint64_t sent_total() const {
    return sent[0][0] + sent[0][1] + sent[1][0] + sent[1][1];
  }

  void validate(std::uint64_t n_windows) const {
    if (sent_total() != n_windows)
      throw invariant_error("CountTable: sent cells sum to " + std::to_string(sent_total()) +
                            ", expected n_windows = " + std::to_string(n_windows));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int ch = 0; ch < 2; ++ch)
          if (detected[a][b][ch] > sent[a][b])
            throw invariant_error("CountTable: detected_" + std::to_string(a) +
                                  std::to_string(b) + "_ch" + std::to_string(ch) +
                                  " exceeds sent cell");
  }
};

// Which detector channel defines an effective window ("right-side" clicks,
// "left-side" does not).
struct DetectorMapping {
  int effective_channel = 0;
  int veto_channel = 1;

  void validate() const {
    if (effective_channel < 0 || effective_channel > 1 || veto_channel < 0 || veto_channel > 1 ||
        effective_channel == veto_channel)
      throw invariant_error("DetectorMapping: channels must be distinct members of {0, 1}");
  }
};

// Effective-window tallies and raw-key error rates derived from a CountTable.
struct EffectiveTally {
  std::uint64_t n_o = 0;  // effective O windows (neither sent)
  std::uint64_t n_b = 0;  // effective B windows (both sent)
  std::uint64_t n_z = 0;  // effective Z windows (exactly one sent) — untagged bits
  std::uint64_t m_s = 0;  // raw-key length n_o + n_b + n_z
  double e_z = 0.0;       // bit-flip rate of the raw key
  double qber_bb = 0.0;   // error fraction among both-send detections
};

// Error fraction among both-send windows: clicks on the effective (nominally
// destructive) channel over all both-send clicks.
inline double qber_both_send(const CountTable& counts, const DetectorMapping& mapping) {
  mapping.validate();
  const double num = static_cast<double>(counts.detected[1][1][mapping.effective_channel]);
  const double den = static_cast<double>(counts.detected[1][1][0] + counts.detected[1][1][1]);
  if (den == 0.0) throw degenerate_data_error("qber_both_send: no both-send detections");
  return num / den;
}

// Applies the effective-window rule to a count table. Per-window coincidence
// data is not recorded in the Table-IV shape, so the effective count of a cell
// is the single-channel detection count on the effective channel; double-click
// corrections are second-order at these intensities.
//
// Raw-key bit convention: Alice's bit is her send choice, Bob's bit is the
// negation of his, so Z windows agree and O/B windows disagree.
inline EffectiveTally derive_effective_tally(const CountTable& counts,
                                             const DetectorMapping& mapping) {
  mapping.validate();
  const int eff = mapping.effective_channel;
  EffectiveTally tally;
  tally.n_o = counts.detected[0][0][eff];
  tally.n_b = counts.detected[1][1][eff];
  tally.n_z = counts.detected[0][1][eff] + counts.detected[1][0][eff];
  tally.m_s = tally.n_o + tally.n_b + tally.n_z;
  if (tally.m_s == 0)
    throw degenerate_data_error("derive_effective_tally: no effective windows in dataset");
  tally.e_z = static_cast<double>(tally.n_o + tally.n_b) / static_cast<double>(tally.m_s);
  const std::uint64_t bb_total = counts.detected[1][1][0] + counts.detected[1][1][1];
  tally.qber_bb = bb_total > 0 ? static_cast<double>(counts.detected[1][1][eff]) /
                                     static_cast<double>(bb_total)
                               : 0.0;
  return tally;
}

}  // namespace scsqkd
