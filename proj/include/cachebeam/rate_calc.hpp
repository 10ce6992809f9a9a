#pragma once

/*
 * Closed-form achievable bits per unit energy for the two schemes, their
 * gain decompositions, scheme selection, and inverse-rate memory sharing.
 *
 * All rates are per-user bits per channel use per unit power in the P -> 0
 * limit; ln 2 factors are kept explicit, never pre-multiplied away. The
 * inverse of the achievable rate is convex in the cache sizes, so points
 * between integral corners interpolate linearly in 1/R along each memory
 * axis (the kappa grid in M_r for the multicast scheme, the lambda_tilde
 * grid in M_t for the beamform scheme).
 */

#include <optional>
#include <vector>

#include "cachebeam/core.hpp"
#include "cachebeam/network_layer.hpp"

namespace cachebeam {

struct ZeroLoad : Error {
  using Error::Error;
};
struct OutsideHull : Error {
  using Error::Error;
};

// Multiplicative split of a scheme's sum rate per unit power: the product of
// the three gains times L (the total power budget) reproduces the sum rate
// times ln 2.
struct GainDecomposition {
  double local_caching = 1.0;
  double multicasting = 1.0;
  double beamforming = 1.0;
};

// ---------------------------------------------------------------------------
// Corner-point rates

inline double rate_mc(const SystemConfig& cfg, const CornerParams& cp) {
  if (!cp.kappa.integral || !cp.lambda.integral)
    throw NonIntegralCorner("multicast rate requires integral kappa and lambda");
  const int kappa = cp.kappa.rounded;
  const int lambda = cp.lambda.rounded;
  const int K = cfg.num_rx, L = cfg.num_tx;
  if (kappa >= K) return kInfiniteRate;
  if (lambda < 1) throw NoSchemeApplicable("multicast scheme needs lambda >= 1");
  return (1.0 / kLn2) * (kappa + 1.0) / (K - kappa) * lambda * L;
}

inline double rate_bf(const SystemConfig& cfg, const CornerParams& cp) {
  if (full_rx_cache(cfg)) return kInfiniteRate;
  if (!cp.lambda_tilde.integral)
    throw NonIntegralCorner("beamform rate requires integral lambda_tilde");
  const int lt = cp.lambda_tilde.rounded;
  if (lt < 1) throw NoSchemeApplicable("beamform scheme needs lambda_tilde >= 1");
  const int L = cfg.num_tx;
  const double served = std::min(cfg.num_files, cfg.num_rx);
  return (1.0 / kLn2) / (served * (1.0 - cfg.rx_mem / cfg.num_files)) * lt * L;
}

inline double rate_mc(const SystemConfig& cfg) { return rate_mc(cfg, corner_params(cfg)); }
inline double rate_bf(const SystemConfig& cfg) { return rate_bf(cfg, corner_params(cfg)); }

// ---------------------------------------------------------------------------
// Memory sharing

// Convex combination of corner memory points, linear in 1/R. The query must
// lie on the segment between two of the given corners (within tolerance);
// among the bracketings the one minimizing 1/R wins.
struct MemoryPoint {
  double rx_mem = 0.0;
  double tx_mem = 0.0;
  double rate = 0.0;
};

inline double rate_memory_shared(const SystemConfig& cfg,
                                 const std::vector<MemoryPoint>& corners) {
  const double tol = 1e-9 * std::max(1.0, static_cast<double>(cfg.num_files));
  const double qr = cfg.rx_mem, qt = cfg.tx_mem;
  auto inv = [](double rate) { return is_infinite_rate(rate) ? 0.0 : 1.0 / rate; };

  std::optional<double> best_inv;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    for (std::size_t j = i; j < corners.size(); ++j) {
      const MemoryPoint& a = corners[i];
      const MemoryPoint& b = corners[j];
      const double dr = a.rx_mem - b.rx_mem;
      const double dt = a.tx_mem - b.tx_mem;
      double alpha;
      if (std::abs(dr) <= tol && std::abs(dt) <= tol) {
        if (std::abs(qr - a.rx_mem) > tol || std::abs(qt - a.tx_mem) > tol) continue;
        alpha = 1.0;
      } else if (std::abs(dr) >= std::abs(dt)) {
        alpha = (qr - b.rx_mem) / dr;
      } else {
        alpha = (qt - b.tx_mem) / dt;
      }
      if (alpha < -1e-12 || alpha > 1.0 + 1e-12) continue;
      alpha = std::clamp(alpha, 0.0, 1.0);
      // Both coordinates must be consistent with the same weight.
      if (std::abs(alpha * a.rx_mem + (1 - alpha) * b.rx_mem - qr) > tol) continue;
      if (std::abs(alpha * a.tx_mem + (1 - alpha) * b.tx_mem - qt) > tol) continue;
      const double cand = alpha * inv(a.rate) + (1 - alpha) * inv(b.rate);
      if (!best_inv || cand < *best_inv) best_inv = cand;
    }
  }
  if (!best_inv) throw OutsideHull("memory point is not on a segment between given corners");
  return *best_inv == 0.0 ? kInfiniteRate : 1.0 / *best_inv;
}

namespace detail {

// 1/R at an integral multicast corner (kappa, lambda).
inline double mc_inverse_rate(int kappa, int lambda, int K, int L) {
  if (kappa >= K) return 0.0;
  return (K - kappa) * kLn2 / ((kappa + 1.0) * lambda * L);
}

}  // namespace detail

// Multicast rate at an arbitrary memory point, interpolating 1/R along the
// kappa grid and, when M_t is off the lambda grid too, along lambda as well.
// Empty when the scheme does not apply (L*M_t/N < 1).
inline std::optional<double> rate_mc_interpolated(const SystemConfig& cfg) {
  const int K = cfg.num_rx, L = cfg.num_tx;
  const CornerParams cp = corner_params(cfg);
  const double lambda = cp.lambda.integral ? cp.lambda.rounded : cp.lambda.value;
  if (lambda < 1.0 - kIntegralTol) return std::nullopt;
  const double kappa = cp.kappa.integral ? cp.kappa.rounded : cp.kappa.value;

  const int klo = std::clamp(static_cast<int>(std::floor(kappa)), 0, K);
  const int khi = std::min(klo + 1, K);
  const double fk = std::clamp(kappa - klo, 0.0, 1.0);
  const int llo = std::clamp(static_cast<int>(std::floor(lambda)), 1, L);
  const int lhi = std::min(llo + 1, L);
  const double fl = std::clamp(lambda - llo, 0.0, 1.0);

  double inv = 0.0;
  inv += (1 - fk) * (1 - fl) * detail::mc_inverse_rate(klo, llo, K, L);
  inv += (1 - fk) * fl * detail::mc_inverse_rate(klo, lhi, K, L);
  inv += fk * (1 - fl) * detail::mc_inverse_rate(khi, llo, K, L);
  inv += fk * fl * detail::mc_inverse_rate(khi, lhi, K, L);
  return inv == 0.0 ? kInfiniteRate : 1.0 / inv;
}

// Beamform rate at an arbitrary memory point, interpolating 1/R along the
// lambda_tilde grid in M_t. Empty when lambda_tilde < 1.
inline std::optional<double> rate_bf_interpolated(const SystemConfig& cfg) {
  if (full_rx_cache(cfg)) return kInfiniteRate;
  const int L = cfg.num_tx;
  const CornerParams cp = corner_params(cfg);
  const double lt = cp.lambda_tilde.integral ? cp.lambda_tilde.rounded : cp.lambda_tilde.value;
  if (lt < 1.0 - kIntegralTol) return std::nullopt;
  const double served = std::min(cfg.num_files, cfg.num_rx);
  const double residual = 1.0 - cfg.rx_mem / cfg.num_files;
  auto inv_at = [&](int j) { return served * residual * kLn2 / (static_cast<double>(j) * L); };

  const int jlo = std::clamp(static_cast<int>(std::floor(lt)), 1, L);
  const int jhi = std::min(jlo + 1, L);
  const double f = std::clamp(lt - jlo, 0.0, 1.0);
  const double inv = (1 - f) * inv_at(jlo) + f * inv_at(jhi);
  return 1.0 / inv;
}

// The better of the two schemes at this memory point.
inline double rate_combined(const SystemConfig& cfg) {
  const std::optional<double> mc = rate_mc_interpolated(cfg);
  const std::optional<double> bf = rate_bf_interpolated(cfg);
  if (!mc && !bf)
    throw NoSchemeApplicable("no scheme reaches this memory point (both sharing levels < 1)");
  if (!mc) return *bf;
  if (!bf) return *mc;
  return std::max(*mc, *bf);
}

// ---------------------------------------------------------------------------
// Gain decompositions

inline GainDecomposition gain_decomposition(const SystemConfig& cfg, const CornerParams& cp,
                                            Scheme scheme) {
  const double n = cfg.num_files;
  GainDecomposition g;
  g.local_caching = 1.0 / (1.0 - cfg.rx_mem / n);
  if (scheme == Scheme::multicast) {
    if (!cp.kappa.integral || !cp.lambda.integral)
      throw NonIntegralCorner("gain decomposition requires an integral corner");
    g.multicasting = cfg.num_rx * cfg.rx_mem / n + 1.0;
    g.beamforming = cfg.num_tx * cfg.tx_mem / n;
  } else {
    if (!cp.lambda_tilde_infinite && !cp.lambda_tilde.integral)
      throw NonIntegralCorner("gain decomposition requires an integral corner");
    g.multicasting = 1.0;
    g.beamforming = cp.lambda_tilde_infinite ? static_cast<double>(cfg.num_tx)
                                             : static_cast<double>(cp.lambda_tilde.rounded);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Separation interface

// R = R'_pq / v_pq: a per-message physical-layer rate turns into a file rate
// through the network-layer load.
inline double rate_from_separation(double per_message_rate, double v_pq) {
  if (!(v_pq > 0.0)) throw ZeroLoad("network load must be positive");
  return per_message_rate / v_pq;
}

// Equal split of the physical layer's guaranteed sum (L*q/ln2 bits per unit
// energy) among the bit pipes the scheme schedules. Scheduling makes every
// pipe equally likely, so the symmetric share is what each one gets.
inline double lemma1_per_message_rate(int L, int q, double num_messages) {
  return (L * q / kLn2) / num_messages;
}

// Chains the network load with the physical layer's per-message share; at
// every integral corner this reproduces the closed-form scheme rate exactly.
inline double separation_rate(Scheme scheme, const SystemConfig& cfg, const CornerParams& cp) {
  const NetworkLoad nl = network_load(scheme, cfg, cp);
  const double per_msg = lemma1_per_message_rate(cfg.num_tx, nl.q, nl.num_messages);
  return rate_from_separation(per_msg, nl.v_pq);
}

}  // namespace cachebeam
