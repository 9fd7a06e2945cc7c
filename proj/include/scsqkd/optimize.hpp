#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "scsqkd/channel.hpp"
#include "scsqkd/errors.hpp"
#include "scsqkd/security.hpp"

namespace scsqkd {

struct SearchBox {
  double mu_a_min = 0.001, mu_a_max = 0.05;
  double mu_b_min = 0.001, mu_b_max = 0.05;
  double p_send_min = 0.05, p_send_max = 0.5;

  void validate() const {
    if (mu_a_min > mu_a_max || mu_b_min > mu_b_max || p_send_min > p_send_max)
      throw invariant_error("SearchBox: empty search box");
    if (mu_a_min < 0.0 || mu_b_min < 0.0) throw invariant_error("SearchBox: negative intensity");
    if (!(p_send_min > 0.0 && p_send_max < 1.0))
      throw invariant_error("SearchBox: p_send bounds outside (0, 1)");
  }

  bool is_point() const {
    return mu_a_min == mu_a_max && mu_b_min == mu_b_max && p_send_min == p_send_max;
  }
};

struct OptimizerSettings {
  int grid_points = 4;           // coarse lattice points per axis
  int n_random_starts = 4;       // extra seeded starting points
  int max_sweeps = 60;           // coordinate-descent sweeps
  double shrink = 0.5;           // step reduction when a sweep stalls
  double min_step_fraction = 1e-3;
  std::uint64_t seed = 1;
  int quadrature_order = 16;
};

struct OptimizationResult {
  ProtocolParams params;
  double r_coh = -std::numeric_limits<double>::infinity();
  KeyRateReport report;
  std::uint64_t evaluations = 0;
};

// Derivative-free search for (mu_A, mu_B, p_send) maximizing the
// coherent-attack key rate on an analytically simulated channel: a coarse grid
// plus seeded restarts, then coordinate descent with shrinking steps.
// Deterministic for a fixed seed and box; ties keep the earliest candidate.
inline OptimizationResult optimize_parameters(const ChannelSpec& channel,
                                              const std::array<DetectorSpec, 2>& detectors,
                                              const FrameLayout& frame,
                                              const ProtocolParams& reference,
                                              LogFailureProb eps_coh, const SearchBox& box,
                                              const OptimizerSettings& settings = {}) {
  box.validate();
  channel.validate();
  frame.validate();

  struct Point {
    double mu_a, mu_b, p_send;
  };

  OptimizationResult result;
  const auto evaluate = [&](const Point& pt) -> double {
    ++result.evaluations;
    ProtocolParams params = reference;
    params.mu_a = pt.mu_a;
    params.mu_b = pt.mu_b;
    params.p_send = pt.p_send;
    apply_intensity_bounds(params);
    try {
      const ExpectedCountTable table = expected_count_table(params, channel, detectors, frame,
                                                            settings.quadrature_order);
      return analyze(params, table.counts, DetectorMapping{}, eps_coh).r_coh;
    } catch (const degenerate_data_error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  Point best{0.0, 0.0, 0.0};
  double best_rate = -std::numeric_limits<double>::infinity();
  const auto consider = [&](const Point& pt) {
    const double rate = evaluate(pt);
    if (rate > best_rate) {
      best_rate = rate;
      best = pt;
    }
  };

  // coarse lattice, endpoints included
  const auto lattice = [&](double lo, double hi, int idx) {
    if (settings.grid_points <= 1 || lo == hi) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(idx) / (settings.grid_points - 1);
  };
  const int g = std::max(settings.grid_points, 1);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      for (int k = 0; k < g; ++k)
        consider({lattice(box.mu_a_min, box.mu_a_max, i), lattice(box.mu_b_min, box.mu_b_max, j),
                  lattice(box.p_send_min, box.p_send_max, k)});

  // the reference operating point, when it lies inside the box
  if (reference.mu_a >= box.mu_a_min && reference.mu_a <= box.mu_a_max &&
      reference.mu_b >= box.mu_b_min && reference.mu_b <= box.mu_b_max &&
      reference.p_send >= box.p_send_min && reference.p_send <= box.p_send_max)
    consider({reference.mu_a, reference.mu_b, reference.p_send});

  // seeded random restarts
  Rng rng(settings.seed);
  for (int i = 0; i < settings.n_random_starts; ++i)
    consider({box.mu_a_min + (box.mu_a_max - box.mu_a_min) * rng.uniform(),
              box.mu_b_min + (box.mu_b_max - box.mu_b_min) * rng.uniform(),
              box.p_send_min + (box.p_send_max - box.p_send_min) * rng.uniform()});

  // coordinate descent with shrinking steps
  const std::array<double, 3> range{box.mu_a_max - box.mu_a_min, box.mu_b_max - box.mu_b_min,
                                    box.p_send_max - box.p_send_min};
  std::array<double, 3> step{range[0] / 4.0, range[1] / 4.0, range[2] / 4.0};
  const auto clamp = [](double v, double lo, double hi) { return std::min(std::max(v, lo), hi); };
  for (int sweep = 0; sweep < settings.max_sweeps; ++sweep) {
    bool improved = false;
    for (int axis = 0; axis < 3; ++axis) {
      if (step[axis] <= 0.0) continue;
      for (double direction : {+1.0, -1.0}) {
        Point candidate = best;
        double* coord = axis == 0 ? &candidate.mu_a : axis == 1 ? &candidate.mu_b
                                                                : &candidate.p_send;
        const double lo = axis == 0 ? box.mu_a_min : axis == 1 ? box.mu_b_min : box.p_send_min;
        const double hi = axis == 0 ? box.mu_a_max : axis == 1 ? box.mu_b_max : box.p_send_max;
        *coord = clamp(*coord + direction * step[axis], lo, hi);
        const double rate = evaluate(candidate);
        if (rate > best_rate) {
          best_rate = rate;
          best = candidate;
          improved = true;
        }
      }
    }
    if (!improved) {
      bool any_left = false;
      for (int axis = 0; axis < 3; ++axis) {
        step[axis] *= settings.shrink;
        if (range[axis] > 0.0 && step[axis] >= settings.min_step_fraction * range[axis])
          any_left = true;
      }
      if (!any_left) break;
    }
  }

  result.params = reference;
  result.params.mu_a = best.mu_a;
  result.params.mu_b = best.mu_b;
  result.params.p_send = best.p_send;
  apply_intensity_bounds(result.params);
  result.r_coh = best_rate;
  const ExpectedCountTable table = expected_count_table(result.params, channel, detectors, frame,
                                                        settings.quadrature_order);
  result.report = analyze(result.params, table.counts, DetectorMapping{}, eps_coh);
  return result;
}

}  // namespace scsqkd
