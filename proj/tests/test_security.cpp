#include <catch2/catch.hpp>

#include <cmath>

#include "scsqkd/dataset.hpp"
#include "scsqkd/security.hpp"

using namespace scsqkd;

namespace {
const LogFailureProb kEpsCoh = LogFailureProb::from_xi(1e-10);
}

TEST_CASE("resolve_budget matches the arbitrary-precision oracle", "[security]") {
  const SecurityBudget b = resolve_budget(363000000000ULL, kEpsCoh, 8);
  CHECK(b.log2_inv_eps == Approx(2455.07849474471).epsilon(1e-9));
  CHECK(b.log2_inv_eps_cor == b.log2_inv_eps);
  CHECK(b.log2_inv_eps_pa == b.log2_inv_eps);
  CHECK(b.log2_inv_eps_bar == b.log2_inv_eps);
  CHECK(b.log2_inv_eps_coh == Approx(33.2192809488736).epsilon(1e-12));

  // direct log arithmetic: 63*log2(1.126e12 + 1) + log2(1e10) + log2(6)
  const SecurityBudget b2 = resolve_budget(1126000000000ULL, kEpsCoh, 8);
  CHECK(b2.log2_inv_eps == Approx(2557.96791331186).epsilon(1e-9));

  const SecurityBudget b3 = resolve_budget(1, LogFailureProb{0.0}, 8);
  CHECK(b3.log2_inv_eps == Approx(63.0 + std::log2(6.0)).epsilon(1e-14));

  CHECK_THROWS_AS(resolve_budget(0, kEpsCoh, 8), invariant_error);
  CHECK_THROWS_AS(resolve_budget(100, kEpsCoh, 1), invariant_error);
}

TEST_CASE("budget audit: no stated security bit is created", "[security]") {
  for (std::uint64_t n : {1000ULL, 363000000000ULL, 1126000000000ULL}) {
    const SecurityBudget b = resolve_budget(n, kEpsCoh, 8);
    // route 1: eps_col = 6 eps; route 2: eps_col = eps_coh / (N+1)^(d^2-1)
    const double via_components = b.log2_inv_eps - std::log2(6.0);
    const double via_postselection =
        b.log2_inv_eps_coh + 63.0 * std::log2(static_cast<double>(n) + 1.0);
    CHECK(via_components == Approx(via_postselection).margin(1e-6));
  }
}

TEST_CASE("cbar2 values", "[security]") {
  CHECK(cbar2(0.0, 0.0, 0.0) == 0.0);
  // 0 km intensity bounds, frozen from a long-double evaluation
  CHECK(cbar2(0.0178, 0.0356, 0.0) == Approx(0.0250057375016018).epsilon(1e-13));
  CHECK_THROWS_AS(cbar2(-0.01, 0.0356, 0.0), std::domain_error);

  // small-mu asymptotics: cbar2 -> sqrt(mu_a mu_b) (1 - (mu_a + mu_b)/8 + ...)
  const double mu = 1e-6;
  const double expected = mu * (1.0 - 2.0 * mu / 8.0);
  CHECK(cbar2(mu, mu, 0.0) == Approx(expected).epsilon(1e-9));
}

TEST_CASE("phase error bound vanishes for empty tallies at xi = 1", "[security]") {
  ProtocolParams params;
  params.n_windows = 1000000;
  params.p_send = 0.2;
  SecurityBudget budget;  // all zeros: xi = 1 everywhere
  EffectiveTally tally;
  tally.n_z = 1000;
  tally.m_s = 1000;
  const PhaseErrorBound pe = phase_error_bound(params, tally, budget);
  CHECK(pe.mean_nph_up == 0.0);
  CHECK(pe.nph_up == 0.0);
  CHECK(pe.e_ph_bar == 0.0);

  tally.n_z = 0;
  CHECK_THROWS_AS(phase_error_bound(params, tally, budget), degenerate_data_error);
}

TEST_CASE("phase error bound on the 0 km dataset", "[security]") {
  const Dataset ds = embedded_dataset("paper_0km");
  const EffectiveTally tally = derive_effective_tally(ds.counts, DetectorMapping{});
  const SecurityBudget budget = resolve_budget(ds.params.n_windows, kEpsCoh, 8);
  const PhaseErrorBound pe = phase_error_bound(ds.params, tally, budget);
  // full-pipeline value, frozen from the long-double oracle; lands near 0.11
  CHECK(pe.e_ph_bar == Approx(0.108873).epsilon(1e-4));
  CHECK(pe.e_ph_bar > 0.08);
  CHECK(pe.e_ph_bar < 0.12);
  CHECK(pe.n_o_up >= static_cast<double>(tally.n_o));
  CHECK(pe.n_b_up >= static_cast<double>(tally.n_b));
  CHECK(pe.nph_up >= pe.mean_nph_up);
}

TEST_CASE("doubling n_b strictly increases the phase error bound", "[security]") {
  const Dataset ds = embedded_dataset("paper_0km");
  EffectiveTally tally = derive_effective_tally(ds.counts, DetectorMapping{});
  const SecurityBudget budget = resolve_budget(ds.params.n_windows, kEpsCoh, 8);
  const double base = phase_error_bound(ds.params, tally, budget).e_ph_bar;
  tally.n_b *= 2;
  tally.m_s = tally.n_o + tally.n_b + tally.n_z;
  const double doubled = phase_error_bound(ds.params, tally, budget).e_ph_bar;
  CHECK(doubled > base);
}

TEST_CASE("key rate formula edge cases", "[security]") {
  ProtocolParams params;
  params.n_windows = 363000000000ULL;
  const SecurityBudget budget = resolve_budget(params.n_windows, kEpsCoh, 8);

  EffectiveTally empty_z;
  empty_z.m_s = 1000;
  empty_z.e_z = 0.1;
  CHECK(key_rate_collective(params, empty_z, budget, 0.0) < 0.0);

  EffectiveTally saturated;
  saturated.n_z = 1000000;
  saturated.m_s = 2000000;
  saturated.e_z = 0.5;
  CHECK(key_rate_collective(params, saturated, budget, 0.5) < 0.0);
  // above 0.5 the entropy term stays saturated at 1
  CHECK(key_rate_collective(params, saturated, budget, 0.7) ==
        key_rate_collective(params, saturated, budget, 0.5));
}

TEST_CASE("coherent-attack penalty arithmetic", "[security]") {
  // frozen: 2 * 63 * log2(3.63e11 + 1) / 3.63e11; evaluated at r_col = 0 so the
  // penalty is read off without cancellation
  CHECK(-key_rate_coherent(0.0, 363000000000ULL, 8) ==
        Approx(1.33293347178794e-08).epsilon(1e-12));
  const double r_col = 1e-3;
  CHECK(r_col - key_rate_coherent(r_col, 363000000000ULL, 8) ==
        Approx(1.33293347178794e-08).epsilon(1e-4));
  CHECK(key_rate_coherent(r_col, 363000000000ULL, 1) == r_col);
  // penalty shrinks monotonically with N
  const double p12 = r_col - key_rate_coherent(r_col, 1000000000000ULL, 8);
  const double p14 = r_col - key_rate_coherent(r_col, 100000000000000ULL, 8);
  CHECK(p14 < p12);
  CHECK(p14 > 0.0);
}

TEST_CASE("analyze reproduces the published 0 km key rate", "[security]") {
  const Dataset ds = embedded_dataset("paper_0km");
  const KeyRateReport report = analyze(ds.params, ds.counts, DetectorMapping{}, kEpsCoh);
  CHECK(report.r_coh == Approx(6.47e-4).epsilon(0.15));
  CHECK(report.r_coh <= report.r_col);
  CHECK(report.r_bps == Approx(report.r_coh_clamped * 1e8));
  CHECK(report.leak_ec > 0.0);
  CHECK(report.phase.cbar2 > 0.0);

  // bit-reproducible across runs
  const KeyRateReport again = analyze(ds.params, ds.counts, DetectorMapping{}, kEpsCoh);
  CHECK(report.r_coh == again.r_coh);
  CHECK(report.phase.mean_nph_up == again.phase.mean_nph_up);
}

TEST_CASE("increasing error-window tallies never helps the key rate", "[security]") {
  const Dataset ds = embedded_dataset("paper_50p5km");
  const auto rate_with = [&](std::uint64_t extra_o, std::uint64_t extra_b) {
    CountTable counts = ds.counts;
    counts.detected[0][0][0] += extra_o;
    counts.detected[1][1][0] += extra_b;
    return analyze(ds.params, counts, DetectorMapping{}, kEpsCoh).r_col;
  };
  const double base = rate_with(0, 0);
  CHECK(rate_with(10000, 0) <= base);
  CHECK(rate_with(0, 10000) <= base);
  CHECK(rate_with(20000, 20000) <= rate_with(10000, 10000));
}

TEST_CASE("scaling all counts and N together improves the finite-size rate", "[security]") {
  const Dataset ds = embedded_dataset("paper_50p5km");
  const auto rate_scaled = [&](std::uint64_t k) {
    ProtocolParams params = ds.params;
    params.n_windows *= k;
    CountTable counts = ds.counts;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        counts.sent[a][b] *= k;
        for (int ch = 0; ch < 2; ++ch) counts.detected[a][b][ch] *= k;
      }
    return analyze(params, counts, DetectorMapping{}, kEpsCoh).r_coh;
  };
  const double r1 = rate_scaled(1);
  const double r10 = rate_scaled(10);
  const double r100 = rate_scaled(100);
  CHECK(r10 > r1);
  CHECK(r100 > r10);
}

TEST_CASE("growing n_z with fixed ratios grows the untagged-bit yield", "[security]") {
  const Dataset ds = embedded_dataset("paper_0km");
  const SecurityBudget budget = resolve_budget(ds.params.n_windows, kEpsCoh, 8);
  const EffectiveTally base = derive_effective_tally(ds.counts, DetectorMapping{});
  EffectiveTally doubled = base;
  doubled.n_o *= 2;
  doubled.n_b *= 2;
  doubled.n_z *= 2;
  doubled.m_s *= 2;
  const double yield_base =
      static_cast<double>(base.n_z) *
      (1.0 - binary_entropy(phase_error_bound(ds.params, base, budget).e_ph_bar));
  const double yield_doubled =
      static_cast<double>(doubled.n_z) *
      (1.0 - binary_entropy(phase_error_bound(ds.params, doubled, budget).e_ph_bar));
  CHECK(yield_doubled >= yield_base);
}

TEST_CASE("report document carries the audit trail", "[security]") {
  const Dataset ds = embedded_dataset("paper_0km");
  const KeyRateReport report = analyze(ds.params, ds.counts, DetectorMapping{}, kEpsCoh);
  const Document doc = report_to_document(ds.params, report);
  CHECK(doc.schema() == kReportSchema);
  CHECK(doc.get_num("budget", "log2_inv_eps") == Approx(2455.07849474471).epsilon(1e-9));
  CHECK(doc.get_num("keyrate", "r_coh_per_window") == report.r_coh);
  CHECK(doc.get_count("tally", "n_z") == report.tally.n_z);
  // serialization is byte-stable
  CHECK(doc.serialize() == report_to_document(ds.params, report).serialize());
}
