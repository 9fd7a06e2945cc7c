#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "scsqkd/core.hpp"
#include "scsqkd/document.hpp"
#include "scsqkd/errors.hpp"
#include "scsqkd/stat_bounds.hpp"

namespace scsqkd {

// Failure-probability budget, all in log2(1/eps) form. The equal-split
// convention eps_cor = eps_PA = eps_bar = eps makes the collective budget
// eps_col = 6*eps (three named components plus three statistical-fluctuation
// uses), and the postselection penalty relates eps_col to the coherent-attack
// target: eps_coh = eps_col * (N+1)^(d^2-1).
struct SecurityBudget {
  double log2_inv_eps_coh = 0.0;
  double log2_inv_eps_cor = 0.0;
  double log2_inv_eps_pa = 0.0;
  double log2_inv_eps_bar = 0.0;
  double log2_inv_eps = 0.0;

  // Per-use failure probability for the three Chernoff invocations.
  LogFailureProb chernoff_xi() const { return LogFailureProb{log2_inv_eps}; }
};

inline SecurityBudget resolve_budget(std::uint64_t n_windows, LogFailureProb eps_coh, int d) {
  if (n_windows < 1) throw invariant_error("resolve_budget: n_windows must be >= 1");
  if (d < 2) throw invariant_error("resolve_budget: d must be >= 2");
  SecurityBudget b;
  b.log2_inv_eps_coh = eps_coh.log2_inv_xi;
  const double postselection = static_cast<double>(d) * d - 1.0;
  b.log2_inv_eps = eps_coh.log2_inv_xi +
                   postselection * std::log2(static_cast<double>(n_windows) + 1.0) +
                   std::log2(6.0);
  b.log2_inv_eps_cor = b.log2_inv_eps_pa = b.log2_inv_eps_bar = b.log2_inv_eps;
  return b;
}

// Cross-term coefficient of the phase-error bound, from the intensity upper
// bounds alone (c0 = c1 = 1):
//   cbar2 = sqrt(T_A * T_B),
//   T_P   = 2 - 2 e^{-mu_P^U/2 - mu_0^U/2} + 2 sqrt((1 - e^{-mu_P^U})(1 - e^{-mu_0^U})).
inline double cbar2(double mu_a_up, double mu_b_up, double mu_vac_up) {
  if (mu_a_up < 0.0 || mu_b_up < 0.0 || mu_vac_up < 0.0)
    throw std::domain_error("cbar2: negative intensity bound");
  const auto term = [mu_vac_up](double mu_up) {
    // -expm1(-x) = 1 - e^-x without cancellation at the small intensities here
    return -2.0 * std::expm1(-mu_up / 2.0 - mu_vac_up / 2.0) +
           2.0 * std::sqrt((-std::expm1(-mu_up)) * (-std::expm1(-mu_vac_up)));
  };
  return std::sqrt(term(mu_a_up) * term(mu_b_up));
}

struct PhaseErrorBound {
  double n_o_up = 0.0;      // <n_O>^U
  double n_b_up = 0.0;      // <n_B>^U
  double cbar2 = 0.0;
  double mean_nph_up = 0.0;  // <Nbar^ph>
  double nph_up = 0.0;       // Nbar^ph = O^U(<Nbar^ph>)
  double e_ph_bar = 0.0;     // Nbar^ph / n_Z
};

// Upper-bounds the phase-flip error rate of the untagged bits from the
// effective-window tallies and the intensity upper bounds.
inline PhaseErrorBound phase_error_bound(const ProtocolParams& params, const EffectiveTally& tally,
                                         const SecurityBudget& budget) {
  if (tally.n_z == 0) throw degenerate_data_error("phase_error_bound: n_z = 0");
  const LogFailureProb xi = budget.chernoff_xi();
  PhaseErrorBound out;
  out.n_o_up = expectation_upper(static_cast<double>(tally.n_o), xi);
  out.n_b_up = expectation_upper(static_cast<double>(tally.n_b), xi);
  out.cbar2 = cbar2(params.mu_a_up, params.mu_b_up, params.mu_vac_up);

  const double p0 = params.p_vac();
  const double px = params.p_send;
  const double n = static_cast<double>(params.n_windows);
  const double c2 = out.cbar2;
  const double c2sq = c2 * c2;
  out.mean_nph_up =
      (p0 * px / 2.0) *
      (out.n_o_up / (p0 * p0) + out.n_b_up / (px * px) + c2sq * n +
       2.0 / (p0 * px) * std::sqrt(out.n_o_up * out.n_b_up) +
       (2.0 * c2 / p0) * std::sqrt(n * out.n_o_up) + (2.0 * c2 / px) * std::sqrt(n * out.n_b_up));
  out.nph_up = observed_upper(out.mean_nph_up, xi);
  out.e_ph_bar = out.nph_up / static_cast<double>(tally.n_z);
  return out;
}

// Secure key rate per window under collective attack. The phase-error entropy
// term saturates at 1 above 0.5, keeping the formula total; negative rates are
// returned as-is so optimizers can see the gradient.
inline double key_rate_collective(const ProtocolParams& params, const EffectiveTally& tally,
                                  const SecurityBudget& budget, double e_ph_bar) {
  if (e_ph_bar < 0.0) throw std::domain_error("key_rate_collective: negative phase error rate");
  const double h_phase = e_ph_bar >= 0.5 ? 1.0 : binary_entropy(e_ph_bar);
  const double n = static_cast<double>(params.n_windows);
  const double n_z = static_cast<double>(tally.n_z);
  const double leak_ec =
      params.ec_inefficiency * static_cast<double>(tally.m_s) * binary_entropy(tally.e_z);
  const double d = static_cast<double>(params.dimension_d);
  const double secret =
      n_z * (1.0 - h_phase) - leak_ec - (budget.log2_inv_eps_cor + 1.0) -
      2.0 * budget.log2_inv_eps_pa - (d + 3.0) * std::sqrt(n_z * (budget.log2_inv_eps_bar + 1.0));
  return secret / n;
}

// Postselection penalty converting collective-attack security into
// coherent-attack security.
inline double key_rate_coherent(double r_col, std::uint64_t n_windows, int d) {
  const double n = static_cast<double>(n_windows);
  const double postselection = static_cast<double>(d) * d - 1.0;
  return r_col - 2.0 * postselection * std::log2(n + 1.0) / n;
}

// Full audit record of one key-rate evaluation.
struct KeyRateReport {
  EffectiveTally tally;
  SecurityBudget budget;
  PhaseErrorBound phase;
  double leak_ec = 0.0;
  double r_col = 0.0;
  double r_coh = 0.0;
  double r_coh_clamped = 0.0;  // max(r_coh, 0) for consumers
  double r_bps = 0.0;          // r_coh_clamped scaled by the effective window rate
};

inline KeyRateReport analyze(const ProtocolParams& params, const CountTable& counts,
                             const DetectorMapping& mapping, LogFailureProb eps_coh) {
  params.validate();
  counts.validate(params.n_windows);
  KeyRateReport report;
  report.tally = derive_effective_tally(counts, mapping);
  report.budget = resolve_budget(params.n_windows, eps_coh, params.dimension_d);
  report.phase = phase_error_bound(params, report.tally, report.budget);
  report.leak_ec = params.ec_inefficiency * static_cast<double>(report.tally.m_s) *
                   binary_entropy(report.tally.e_z);
  report.r_col = key_rate_collective(params, report.tally, report.budget, report.phase.e_ph_bar);
  report.r_coh = key_rate_coherent(report.r_col, params.n_windows, params.dimension_d);
  report.r_coh_clamped = std::max(report.r_coh, 0.0);
  report.r_bps = report.r_coh_clamped * params.effective_rate_mhz * 1e6;
  return report;
}

inline constexpr std::string_view kReportSchema = "scsqkd/report v1";

// Serializes a report with every intermediate and the full epsilon audit
// trail; consumed by the CLI and by downstream plotting.
inline Document report_to_document(const ProtocolParams& params, const KeyRateReport& r) {
  Document doc;
  doc.set_schema(std::string(kReportSchema));

  doc.set_count("input", "n_windows", params.n_windows);
  doc.set_num("input", "p_send", params.p_send);
  doc.set_num("input", "mu_a", params.mu_a);
  doc.set_num("input", "mu_b", params.mu_b);
  doc.set_num("input", "mu_a_up", params.mu_a_up);
  doc.set_num("input", "mu_b_up", params.mu_b_up);
  doc.set_num("input", "mu_vac_up", params.mu_vac_up);
  doc.set_num("input", "ec_inefficiency", params.ec_inefficiency);
  doc.set_count("input", "dimension_d", static_cast<std::uint64_t>(params.dimension_d));
  doc.set_num("input", "effective_rate_mhz", params.effective_rate_mhz);

  doc.set_count("tally", "n_o", r.tally.n_o);
  doc.set_count("tally", "n_b", r.tally.n_b);
  doc.set_count("tally", "n_z", r.tally.n_z);
  doc.set_count("tally", "m_s", r.tally.m_s);
  doc.set_num("tally", "e_z", r.tally.e_z);
  doc.set_num("tally", "qber_both_send", r.tally.qber_bb);

  doc.set_num("budget", "log2_inv_eps_coh", r.budget.log2_inv_eps_coh);
  doc.set_num("budget", "log2_inv_eps_cor", r.budget.log2_inv_eps_cor);
  doc.set_num("budget", "log2_inv_eps_pa", r.budget.log2_inv_eps_pa);
  doc.set_num("budget", "log2_inv_eps_bar", r.budget.log2_inv_eps_bar);
  doc.set_num("budget", "log2_inv_eps", r.budget.log2_inv_eps);

  doc.set_num("phase_error", "n_o_upper", r.phase.n_o_up);
  doc.set_num("phase_error", "n_b_upper", r.phase.n_b_up);
  doc.set_num("phase_error", "cbar2", r.phase.cbar2);
  doc.set_num("phase_error", "mean_nph_upper", r.phase.mean_nph_up);
  doc.set_num("phase_error", "nph_upper", r.phase.nph_up);
  doc.set_num("phase_error", "e_ph_bar", r.phase.e_ph_bar);

  doc.set_num("keyrate", "leak_ec_bits", r.leak_ec);
  doc.set_num("keyrate", "r_col_per_window", r.r_col);
  doc.set_num("keyrate", "r_coh_per_window", r.r_coh);
  doc.set_num("keyrate", "r_coh_per_window_clamped", r.r_coh_clamped);
  doc.set_num("keyrate", "r_bps", r.r_bps);
  return doc;
}

}  // namespace scsqkd
