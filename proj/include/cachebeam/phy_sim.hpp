#pragma once

/*
 * Monte Carlo physical layer: phase binning, favorable-channel detection,
 * opportunistic scheduling, coherent beamforming gain, duty-cycle
 * estimation, and the resulting sum rate per unit energy.
 *
 * Favorability comes in two flavors. The raw test compares the bins of the
 * phases as given. The aligned test first rotates each receiver's phases
 * relative to the candidate pair's first transmitter (a receiver may always
 * rotate its output by a scalar), which makes every pair's favorable
 * probability exactly beta^-(p-1)(q-1) and keeps the pair distribution
 * exchangeable, so scheduling stays fair and each transmitter is active a
 * q/L fraction of the duty cycle. The simulator and the duty-cycle
 * estimators use the aligned test.
 *
 * Bin comparisons are on integer bin indices only, never on floating-point
 * phases. All randomness is counter-based: results are a pure function of
 * (seed, samples) regardless of worker count.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cachebeam/core.hpp"
#include "cachebeam/parallel.hpp"
#include "cachebeam/rng.hpp"

namespace cachebeam {

struct OutOfRangePhase : Error {
  using Error::Error;
};
struct BinOutOfRange : Error {
  using Error::Error;
};
struct NotFavorable : Error {
  using Error::Error;
};
struct PowerAboveCritical : Error {
  using Error::Error;
};

// Quantization setup: beta >= 8 phase bins (so adjacent in-bin offsets stay
// within the cos(2*pi/beta) coherence bound) and the critical-power slack
// sigma that controls how far below capacity the log is allowed to operate.
struct BinConfig {
  int beta = 8;
  double sigma = 0.01;

  double gamma() const { return 1.0 - std::cos(kTwoPi / beta); }
};

inline BinConfig make_bin_config(int beta, double sigma) {
  if (beta < 8) throw Error("beta must be at least 8");
  if (!(sigma > 0.0)) throw Error("sigma must be positive");
  return BinConfig{beta, sigma};
}

// ---------------------------------------------------------------------------
// Binning

inline double wrap_phase(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;  // fp rounding at the seam
  return r;
}

// The unique b with theta - (2*pi/beta)*b in [0, 2*pi/beta).
inline int bin_index(double theta, int beta) {
  if (!(theta >= 0.0) || theta >= kTwoPi)
    throw OutOfRangePhase("phase must lie in [0, 2*pi)");
  int b = static_cast<int>(theta * beta / kTwoPi);
  if (b >= beta) b = beta - 1;
  return b;
}

// Midpoint of bin b: Phi(b) = b*2*pi/beta + pi/beta, so that
// |Phi(B(theta)) - theta| <= pi/beta for every theta.
inline double representative_phase(int b, int beta) {
  if (b < 0 || b >= beta) throw BinOutOfRange("bin index out of range");
  return (2 * b + 1) * (std::numbers::pi / beta);
}

// theta - Phi(B(theta)), in [-pi/beta, pi/beta).
inline double quantization_offset(double theta, int beta) {
  return theta - representative_phase(bin_index(theta, beta), beta);
}

// ---------------------------------------------------------------------------
// Channel draws

inline ChannelState draw_channel(const CounterRng& rng, std::uint64_t slot, int num_rx,
                                 int num_tx) {
  ChannelState ch = make_channel(num_rx, num_tx);
  for (std::size_t i = 0; i < ch.phases.size(); ++i)
    ch.phases[i] = rng.uniform01(slot, i) * kTwoPi;
  return ch;
}

// Rotates every receiver's row so that the reference transmitter's phase
// becomes zero; a pure receiver-side operation.
inline ChannelState rotate_to_reference(const ChannelState& ch, int ref_tx) {
  ChannelState out = ch;
  for (int k = 1; k <= ch.num_rx; ++k) {
    const double ref = ch.phase(k, ref_tx);
    for (int l = 1; l <= ch.num_tx; ++l) out.phase(k, l) = wrap_phase(ch.phase(k, l) - ref);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Favorability

// Raw test: all receivers in the pair see the same bin from each of the
// pair's transmitters.
inline bool is_favorable(const ChannelState& ch, const MessageSpec& spec, int beta) {
  for (int l : spec.tx_subset) {
    const int b0 = bin_index(ch.phase(spec.rx_subset.front(), l), beta);
    for (std::size_t i = 1; i < spec.rx_subset.size(); ++i)
      if (bin_index(ch.phase(spec.rx_subset[i], l), beta) != b0) return false;
  }
  return true;
}

// Aligned test: same condition on the phases rotated relative to the pair's
// first transmitter.
inline bool is_favorable_aligned(const ChannelState& ch, const MessageSpec& spec, int beta) {
  const int ref = spec.tx_subset.front();
  for (int l : spec.tx_subset) {
    if (l == ref) continue;  // reference column is identically bin 0
    int b0 = -1;
    for (std::size_t i = 0; i < spec.rx_subset.size(); ++i) {
      const int k = spec.rx_subset[i];
      const int b = bin_index(wrap_phase(ch.phase(k, l) - ch.phase(k, ref)), beta);
      if (i == 0)
        b0 = b;
      else if (b != b0)
        return false;
    }
  }
  return true;
}

// Canonical pair enumeration order: receiver subsets outer, transmitter
// subsets inner, both in increasing mask order.
inline std::vector<MessageSpec> all_pairs(int num_rx, int num_tx, int p, int q) {
  std::vector<MessageSpec> pairs;
  for_each_subset(num_rx, p, [&](std::uint64_t rx_mask) {
    for_each_subset(num_tx, q, [&](std::uint64_t tx_mask) {
      pairs.push_back(make_spec(rx_mask, tx_mask));
    });
  });
  return pairs;
}

inline std::vector<MessageSpec> favorable_pairs(const ChannelState& ch, int p, int q, int beta) {
  std::vector<MessageSpec> out;
  for (const MessageSpec& spec : all_pairs(ch.num_rx, ch.num_tx, p, q))
    if (is_favorable(ch, spec, beta)) out.push_back(spec);
  return out;
}

inline std::vector<MessageSpec> favorable_pairs_aligned(const ChannelState& ch, int p, int q,
                                                        int beta) {
  std::vector<MessageSpec> out;
  for (const MessageSpec& spec : all_pairs(ch.num_rx, ch.num_tx, p, q))
    if (is_favorable_aligned(ch, spec, beta)) out.push_back(spec);
  return out;
}

// Uniform choice among the favorable pairs; empty when none is.
inline std::optional<MessageSpec> schedule(const std::vector<MessageSpec>& pairs, double u01) {
  if (pairs.empty()) return std::nullopt;
  std::size_t idx = static_cast<std::size_t>(u01 * pairs.size());
  if (idx >= pairs.size()) idx = pairs.size() - 1;
  return pairs[idx];
}

// ---------------------------------------------------------------------------
// Beamforming gain

// |sum_l exp(j*delta_l)|^2 for the given in-bin offsets.
inline double coherence_gain(const std::vector<double>& deltas) {
  double re = 0.0, im = 0.0;
  for (double d : deltas) {
    re += std::cos(d);
    im += std::sin(d);
  }
  return re * re + im * im;
}

namespace detail {

// Worst receiver's coherent power gain when the transmitters precompensate
// the representative phases of their (shared) bins.
inline double pair_gain(const ChannelState& ch, const MessageSpec& spec, int beta) {
  double worst = std::numeric_limits<double>::infinity();
  std::vector<double> deltas(spec.tx_subset.size());
  for (int k : spec.rx_subset) {
    for (std::size_t i = 0; i < spec.tx_subset.size(); ++i)
      deltas[i] = quantization_offset(ch.phase(k, spec.tx_subset[i]), beta);
    worst = std::min(worst, coherence_gain(deltas));
  }
  return worst;
}

}  // namespace detail

// Guaranteed to be >= cos(2*pi/beta) * q^2 whenever the pair is favorable.
inline double beamform_gain(const ChannelState& ch, const MessageSpec& spec, int beta) {
  if (!is_favorable(ch, spec, beta))
    throw NotFavorable("beamform gain requires a favorable pair");
  return detail::pair_gain(ch, spec, beta);
}

// Same, on the phases rotated to the pair's first transmitter.
inline double beamform_gain_aligned(const ChannelState& ch, const MessageSpec& spec, int beta) {
  const ChannelState rot = rotate_to_reference(ch, spec.tx_subset.front());
  if (!is_favorable(rot, spec, beta))
    throw NotFavorable("beamform gain requires a favorable pair");
  return detail::pair_gain(rot, spec, beta);
}

inline double coherence_gain_bound(int q, int beta) {
  return std::cos(kTwoPi / beta) * static_cast<double>(q) * q;
}

// ---------------------------------------------------------------------------
// Duty cycle

struct DutyCycleEstimate {
  double eta_hat = 0.0;
  double std_err = 0.0;
  std::int64_t samples = 0;
  double analytic_lower = 0.0;  // beta^-(p-1)(q-1)
};

inline double duty_cycle_lower_bound(int p, int q, int beta) {
  return std::pow(static_cast<double>(beta), -static_cast<double>((p - 1) * (q - 1)));
}

namespace detail {

template <typename SlotPredicate>
DutyCycleEstimate estimate_frequency(int p, int q, int beta, std::int64_t samples,
                                     SlotPredicate&& hit) {
  std::int64_t count = 0;
  for (std::int64_t s = 0; s < samples; ++s) count += hit(s) ? 1 : 0;
  DutyCycleEstimate est;
  est.samples = samples;
  est.eta_hat = static_cast<double>(count) / samples;
  est.std_err = std::sqrt(est.eta_hat * (1.0 - est.eta_hat) / samples);
  est.analytic_lower = duty_cycle_lower_bound(p, q, beta);
  return est;
}

}  // namespace detail

// Fraction of i.i.d. channel draws for which at least one pair is favorable
// (aligned sense).
inline DutyCycleEstimate estimate_duty_cycle(int num_rx, int num_tx, int p, int q, int beta,
                                             std::int64_t samples, std::uint64_t seed) {
  const CounterRng rng(seed);
  const std::vector<MessageSpec> pairs = all_pairs(num_rx, num_tx, p, q);
  return detail::estimate_frequency(p, q, beta, samples, [&](std::int64_t s) {
    const ChannelState ch = draw_channel(rng, static_cast<std::uint64_t>(s), num_rx, num_tx);
    for (const MessageSpec& spec : pairs)
      if (is_favorable_aligned(ch, spec, beta)) return true;
    return false;
  });
}

// Frequency of one fixed pair ({1..p}, {1..q}) being favorable; distributed
// exactly Bernoulli(beta^-(p-1)(q-1)).
inline DutyCycleEstimate estimate_single_pair_duty_cycle(int num_rx, int num_tx, int p, int q,
                                                         int beta, std::int64_t samples,
                                                         std::uint64_t seed) {
  const CounterRng rng(seed);
  MessageSpec spec;
  for (int k = 1; k <= p; ++k) spec.rx_subset.push_back(k);
  for (int l = 1; l <= q; ++l) spec.tx_subset.push_back(l);
  return detail::estimate_frequency(p, q, beta, samples, [&](std::int64_t s) {
    const ChannelState ch = draw_channel(rng, static_cast<std::uint64_t>(s), num_rx, num_tx);
    return is_favorable_aligned(ch, spec, beta);
  });
}

// ---------------------------------------------------------------------------
// Sum-rate simulation

struct PhySimConfig {
  int num_rx = 1;
  int num_tx = 1;
  int p = 1;
  int q = 1;
  BinConfig bins;
  double power = 0.0;  // P; 0 selects the critical power
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

struct SlotRecord {
  std::int64_t slot = 0;
  int favorable_count = 0;
  int pair_index = -1;  // index into all_pairs order; -1 when idle
  double gain = 0.0;
};

using SlotSink = std::function<void(const SlotRecord&)>;

struct PhySimResult {
  DutyCycleEstimate duty;
  double min_gain = 0.0;    // worst scheduled coherence gain
  double gain_bound = 0.0;  // cos(2*pi/beta) * q^2
  double power = 0.0;
  double critical_power = 0.0;
  double sum_rate_per_unit_energy = 0.0;  // headline: uses measured duty cycle and worst gain
  double sum_rate_guaranteed = 0.0;       // same with the analytic gain bound
  double time_average_rate = 0.0;         // empirical mean of per-slot rates, per unit energy
  double lemma1_floor = 0.0;              // L*q/ln2
  double epsilon_achieved = 0.0;          // 1 - sum_rate/lemma1_floor
  std::int64_t scheduled_slots = 0;
  std::vector<std::int64_t> per_tx_active_slots;
  std::vector<std::int64_t> per_pair_scheduled;  // canonical pair order
};

inline double critical_power(int num_tx, int p, int q, const BinConfig& bins) {
  return duty_cycle_lower_bound(p, q, bins.beta) * bins.sigma /
         ((1.0 - bins.gamma()) * num_tx * q);
}

// Slot-by-slot opportunistic beamforming at duty-cycle-scaled power
// P' = L*P/(eta*q). Only slots with a favorable pair transmit; the chosen
// pair is uniform among the favorable ones.
inline PhySimResult phy_sum_rate_per_unit_energy(const PhySimConfig& sim,
                                                 const SlotSink* sink = nullptr) {
  const int K = sim.num_rx, L = sim.num_tx, p = sim.p, q = sim.q;
  const int beta = sim.bins.beta;
  const double p_crit = critical_power(L, p, q, sim.bins);
  const double P = sim.power > 0.0 ? sim.power : p_crit;
  if (P > p_crit * (1.0 + 1e-12))
    throw PowerAboveCritical("P exceeds the critical power for this (beta, sigma, p, q)");

  const std::vector<MessageSpec> pairs = all_pairs(K, L, p, q);
  const CounterRng rng(sim.seed);
  const std::uint64_t sched_counter = static_cast<std::uint64_t>(K) * L;

  struct Outcome {
    double gain;
    std::int32_t pair;
    std::int32_t favorable;
  };
  std::vector<Outcome> slots(sim.samples);

  parallel_for_index(sim.samples, [&](std::int64_t s) {
    const ChannelState ch = draw_channel(rng, static_cast<std::uint64_t>(s), K, L);
    thread_local std::vector<std::int32_t> fav;
    fav.clear();
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(pairs.size()); ++i)
      if (is_favorable_aligned(ch, pairs[i], beta)) fav.push_back(i);
    Outcome& out = slots[s];
    out.favorable = static_cast<std::int32_t>(fav.size());
    if (fav.empty()) {
      out.pair = -1;
      out.gain = 0.0;
      return;
    }
    const double u = rng.uniform01(static_cast<std::uint64_t>(s), sched_counter);
    std::size_t idx = static_cast<std::size_t>(u * fav.size());
    if (idx >= fav.size()) idx = fav.size() - 1;
    out.pair = fav[idx];
    out.gain = beamform_gain_aligned(ch, pairs[out.pair], beta);
  });

  PhySimResult res;
  res.per_tx_active_slots.assign(L, 0);
  res.per_pair_scheduled.assign(pairs.size(), 0);
  res.gain_bound = coherence_gain_bound(q, beta);
  res.power = P;
  res.critical_power = p_crit;
  res.lemma1_floor = static_cast<double>(L) * q / kLn2;

  double min_gain = std::numeric_limits<double>::infinity();
  std::int64_t scheduled = 0;
  for (std::int64_t s = 0; s < sim.samples; ++s) {
    const Outcome& out = slots[s];
    if (out.pair < 0) continue;
    ++scheduled;
    min_gain = std::min(min_gain, out.gain);
    ++res.per_pair_scheduled[out.pair];
    for (int l : pairs[out.pair].tx_subset) ++res.per_tx_active_slots[l - 1];
  }
  res.scheduled_slots = scheduled;
  res.min_gain = scheduled > 0 ? min_gain : 0.0;

  res.duty.samples = sim.samples;
  res.duty.eta_hat = static_cast<double>(scheduled) / sim.samples;
  res.duty.std_err = std::sqrt(res.duty.eta_hat * (1.0 - res.duty.eta_hat) / sim.samples);
  res.duty.analytic_lower = duty_cycle_lower_bound(p, q, beta);

  const double eta = res.duty.eta_hat;
  if (eta > 0.0) {
    // Per-slot SNR is gain * P' with symbol power P' = L*P/(eta*q); the
    // worst-gain bound version equals eta*log2(1 + (1-gamma)*L*q*P/eta).
    const double scaled_power = L * P / (eta * q);
    res.sum_rate_per_unit_energy = eta * std::log2(1.0 + res.min_gain * scaled_power) / P;
    res.sum_rate_guaranteed = eta * std::log2(1.0 + res.gain_bound * scaled_power) / P;
    double log_sum = 0.0;
    for (std::int64_t s = 0; s < sim.samples; ++s)
      if (slots[s].pair >= 0) log_sum += std::log2(1.0 + slots[s].gain * scaled_power);
    res.time_average_rate = log_sum / sim.samples / P;
  }
  res.epsilon_achieved = 1.0 - res.sum_rate_per_unit_energy / res.lemma1_floor;

  if (sink) {
    for (std::int64_t s = 0; s < sim.samples; ++s)
      (*sink)(SlotRecord{s, slots[s].favorable, slots[s].pair, slots[s].gain});
  }
  return res;
}

}  // namespace cachebeam
