#pragma once

/*
 * Network-layer placement and delivery for the two caching schemes, built
 * over symbolic file chunks.
 *
 * Multicast scheme: each file is split into one subfile per lambda-sized
 * transmitter subset (a "sublibrary"), and each subfile into one part per
 * kappa-sized receiver subset. Delivery sends, for every sublibrary and every
 * (kappa+1)-sized receiver subset, one XOR-coded message.
 *
 * Beamform scheme: each file is split into a common part cached by every
 * receiver plus one part per lambda_tilde-sized transmitter subset. Delivery
 * sends each distinct requested file's shared parts uncoded.
 *
 * XOR payloads are symbolic (odd-parity sets of chunk ids); decodability is
 * a set-algebra check, not a bit-level one. Chunk labels are canonical sorted
 * subsets, so placements are deterministic and comparable across runs.
 */

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "cachebeam/core.hpp"

namespace cachebeam {

enum class Scheme { multicast, beamform };

inline const char* scheme_name(Scheme s) {
  return s == Scheme::multicast ? "mc" : "bf";
}

// Delivery was invoked with a placement built by the other scheme (or for a
// different instance).
struct PlacementMismatch : Error {
  using Error::Error;
};

enum class ChunkKind : std::uint8_t {
  mc_part,    // multicast: (sublibrary tx-subset, receiver-part rx-subset)
  bf_common,  // beamform: part cached by every receiver
  bf_shared,  // beamform: part labeled by a tx-subset of size lambda_tilde
};

struct Chunk {
  int file = 0;  // 1-based
  ChunkKind kind = ChunkKind::mc_part;
  std::uint64_t tx_mask = 0;
  std::uint64_t rx_mask = 0;
  double size = 0.0;  // fraction of one file

  // Identity excludes size; sizes are determined by the labels.
  friend bool operator==(const Chunk& a, const Chunk& b) {
    return a.file == b.file && a.kind == b.kind && a.tx_mask == b.tx_mask &&
           a.rx_mask == b.rx_mask;
  }
  friend bool operator<(const Chunk& a, const Chunk& b) {
    return std::tie(a.file, a.kind, a.tx_mask, a.rx_mask) <
           std::tie(b.file, b.kind, b.tx_mask, b.rx_mask);
  }
};

// Immutable after construction. Caches and per-file partitions are kept
// sorted so membership tests are binary searches.
struct PlacementMap {
  Scheme scheme = Scheme::multicast;
  SystemConfig cfg;
  std::vector<std::vector<Chunk>> tx_caches;       // index l-1
  std::vector<std::vector<Chunk>> rx_caches;       // index k-1
  std::vector<std::vector<Chunk>> file_partition;  // index n-1: full split of file n

  double tx_usage(int tx) const { return total_size(tx_caches[tx - 1]); }
  double rx_usage(int rx) const { return total_size(rx_caches[rx - 1]); }

  bool tx_has(int tx, const Chunk& c) const {
    return std::binary_search(tx_caches[tx - 1].begin(), tx_caches[tx - 1].end(), c);
  }
  bool rx_has(int rx, const Chunk& c) const {
    return std::binary_search(rx_caches[rx - 1].begin(), rx_caches[rx - 1].end(), c);
  }

  static double total_size(const std::vector<Chunk>& chunks) {
    double s = 0.0;
    for (const Chunk& c : chunks) s += c.size;
    return s;
  }
};

// One bit pipe with its symbolic payload: the XOR of the chunks listed (the
// set has odd parity; a chunk appearing twice would cancel). Every payload
// chunk is cached at every transmitter in spec.tx_subset.
struct Message {
  MessageSpec spec;
  std::vector<Chunk> payload;  // sorted
  double load = 0.0;           // bits as a fraction of one file (v_pq)
};

// (p, q, v_pq) for a scheme at an integral corner, plus the number of bit
// pipes the scheme actually schedules.
struct NetworkLoad {
  int p = 0;
  int q = 0;
  double v_pq = 0.0;
  double num_messages = 0.0;
};

namespace detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw NonIntegralCorner(msg);
}

inline void sort_all(std::vector<std::vector<Chunk>>& vecs) {
  for (auto& v : vecs) std::sort(v.begin(), v.end());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Multicast scheme

inline PlacementMap mc_placement(const SystemConfig& cfg, const CornerParams& cp) {
  detail::require(cp.kappa.integral && cp.lambda.integral,
                  "multicast placement requires integral kappa and lambda");
  const int kappa = cp.kappa.rounded;
  const int lambda = cp.lambda.rounded;
  const int N = cfg.num_files, K = cfg.num_rx, L = cfg.num_tx;
  if (lambda < 1 && kappa < K)
    throw NoSchemeApplicable("multicast scheme needs lambda >= 1 unless receivers cache everything");

  PlacementMap pl;
  pl.scheme = Scheme::multicast;
  pl.cfg = cfg;
  pl.tx_caches.resize(L);
  pl.rx_caches.resize(K);
  pl.file_partition.resize(N);

  const double part_size = 1.0 / (binomial(L, lambda) * binomial(K, kappa));
  for (int n = 1; n <= N; ++n) {
    for_each_subset(L, lambda, [&](std::uint64_t tx_mask) {
      for_each_subset(K, kappa, [&](std::uint64_t rx_mask) {
        const Chunk c{n, ChunkKind::mc_part, tx_mask, rx_mask, part_size};
        pl.file_partition[n - 1].push_back(c);
        for (int l = 1; l <= L; ++l)
          if (tx_mask & (std::uint64_t{1} << (l - 1))) pl.tx_caches[l - 1].push_back(c);
        for (int k = 1; k <= K; ++k)
          if (rx_mask & (std::uint64_t{1} << (k - 1))) pl.rx_caches[k - 1].push_back(c);
      });
    });
  }
  detail::sort_all(pl.tx_caches);
  detail::sort_all(pl.rx_caches);
  detail::sort_all(pl.file_partition);
  return pl;
}

inline std::vector<Message> mc_delivery(const PlacementMap& pl, const Demand& dem,
                                        const SystemConfig& cfg, const CornerParams& cp) {
  if (pl.scheme != Scheme::multicast)
    throw PlacementMismatch("mc_delivery needs a multicast placement");
  detail::require(cp.kappa.integral && cp.lambda.integral,
                  "multicast delivery requires integral kappa and lambda");
  const int kappa = cp.kappa.rounded;
  const int lambda = cp.lambda.rounded;
  const int K = cfg.num_rx, L = cfg.num_tx;
  if (kappa >= K) return {};  // everything is already cached
  if (lambda < 1)
    throw NoSchemeApplicable("multicast delivery needs at least one sending transmitter");

  const double load =
      (K - kappa) / static_cast<double>(kappa + 1) / (binomial(L, lambda) * binomial(K, kappa + 1));
  const double part_size = 1.0 / (binomial(L, lambda) * binomial(K, kappa));

  std::vector<Message> msgs;
  for_each_subset(L, lambda, [&](std::uint64_t tx_mask) {
    for_each_subset(K, kappa + 1, [&](std::uint64_t rx_mask) {
      Message m;
      m.spec = make_spec(rx_mask, tx_mask);
      m.load = load;
      for (int k : m.spec.rx_subset) {
        const std::uint64_t part = rx_mask & ~(std::uint64_t{1} << (k - 1));
        const Chunk c{dem.requests[k - 1], ChunkKind::mc_part, tx_mask, part, part_size};
        // XOR parity: identical chunk references cancel in pairs.
        auto it = std::find(m.payload.begin(), m.payload.end(), c);
        if (it != m.payload.end())
          m.payload.erase(it);
        else
          m.payload.push_back(c);
      }
      std::sort(m.payload.begin(), m.payload.end());
      msgs.push_back(std::move(m));
    });
  });
  return msgs;
}

// ---------------------------------------------------------------------------
// Beamform scheme

inline PlacementMap bf_placement(const SystemConfig& cfg, const CornerParams& cp) {
  const int N = cfg.num_files, K = cfg.num_rx, L = cfg.num_tx;
  PlacementMap pl;
  pl.scheme = Scheme::beamform;
  pl.cfg = cfg;
  pl.tx_caches.resize(L);
  pl.rx_caches.resize(K);
  pl.file_partition.resize(N);

  const double common_size = cfg.rx_mem / N;
  if (common_size > 0.0) {
    for (int n = 1; n <= N; ++n) {
      const Chunk c{n, ChunkKind::bf_common, 0, 0, common_size};
      pl.file_partition[n - 1].push_back(c);
      for (int k = 1; k <= K; ++k) pl.rx_caches[k - 1].push_back(c);
    }
  }
  if (!full_rx_cache(cfg)) {
    detail::require(cp.lambda_tilde.integral,
                    "beamform placement requires integral lambda_tilde");
    const int lt = cp.lambda_tilde.rounded;
    if (lt < 1)
      throw NoSchemeApplicable("beamform scheme needs lambda_tilde >= 1");
    const double shared_size = (1.0 - common_size) / binomial(L, lt);
    for (int n = 1; n <= N; ++n) {
      for_each_subset(L, lt, [&](std::uint64_t tx_mask) {
        const Chunk c{n, ChunkKind::bf_shared, tx_mask, 0, shared_size};
        pl.file_partition[n - 1].push_back(c);
        for (int l = 1; l <= L; ++l)
          if (tx_mask & (std::uint64_t{1} << (l - 1))) pl.tx_caches[l - 1].push_back(c);
      });
    }
  }
  detail::sort_all(pl.tx_caches);
  detail::sort_all(pl.rx_caches);
  detail::sort_all(pl.file_partition);
  return pl;
}

// Receivers requesting the same file are served by the same messages: one
// message per (distinct requested file, tx-subset), addressed to the whole
// group of requesters.
inline std::vector<Message> bf_delivery(const PlacementMap& pl, const Demand& dem,
                                        const SystemConfig& cfg, const CornerParams& cp) {
  if (pl.scheme != Scheme::beamform)
    throw PlacementMismatch("bf_delivery needs a beamform placement");
  if (full_rx_cache(cfg)) return {};
  detail::require(cp.lambda_tilde.integral,
                  "beamform delivery requires integral lambda_tilde");
  const int lt = cp.lambda_tilde.rounded;
  const int L = cfg.num_tx;
  const double load = (1.0 - cfg.rx_mem / cfg.num_files) / binomial(L, lt);

  // Group receivers by requested file, ascending file id.
  std::map<int, std::uint64_t> groups;
  for (int k = 1; k <= cfg.num_rx; ++k)
    groups[dem.requests[k - 1]] |= std::uint64_t{1} << (k - 1);

  std::vector<Message> msgs;
  for (const auto& [file, rx_mask] : groups) {
    for_each_subset(L, lt, [&](std::uint64_t tx_mask) {
      Message m;
      m.spec = make_spec(rx_mask, tx_mask);
      m.load = load;
      m.payload.push_back(Chunk{file, ChunkKind::bf_shared, tx_mask, 0, load});
      msgs.push_back(std::move(m));
    });
  }
  return msgs;
}

// ---------------------------------------------------------------------------
// Verification and loads

// Receiver k decodes iff every chunk of its requested file is either cached
// or XOR-recoverable from a message addressed to a subset containing k, with
// all other payload chunks cancelled from its own cache.
inline std::vector<bool> verify_decodability(const PlacementMap& pl,
                                             const std::vector<Message>& msgs,
                                             const Demand& dem) {
  const int K = static_cast<int>(pl.rx_caches.size());
  std::vector<bool> ok(K, true);
  for (int k = 1; k <= K; ++k) {
    const int file = dem.requests[k - 1];
    for (const Chunk& c : pl.file_partition[file - 1]) {
      if (pl.rx_has(k, c)) continue;
      bool recovered = false;
      for (const Message& m : msgs) {
        if (!std::binary_search(m.spec.rx_subset.begin(), m.spec.rx_subset.end(), k)) continue;
        if (!std::binary_search(m.payload.begin(), m.payload.end(), c)) continue;
        bool rest_cached = true;
        for (const Chunk& other : m.payload) {
          if (other == c) continue;
          if (!pl.rx_has(k, other)) {
            rest_cached = false;
            break;
          }
        }
        if (rest_cached) {
          recovered = true;
          break;
        }
      }
      if (!recovered) {
        ok[k - 1] = false;
        break;
      }
    }
  }
  return ok;
}

inline NetworkLoad network_load(Scheme scheme, const SystemConfig& cfg, const CornerParams& cp) {
  NetworkLoad nl;
  const int K = cfg.num_rx, L = cfg.num_tx;
  if (scheme == Scheme::multicast) {
    detail::require(cp.kappa.integral && cp.lambda.integral,
                    "multicast load requires integral kappa and lambda");
    const int kappa = cp.kappa.rounded;
    const int lambda = cp.lambda.rounded;
    nl.p = kappa + 1;
    nl.q = lambda;
    nl.num_messages = binomial(L, lambda) * binomial(K, kappa + 1);
    nl.v_pq = kappa >= K ? 0.0
                         : (K - kappa) / static_cast<double>(kappa + 1) /
                               (binomial(L, lambda) * binomial(K, kappa + 1));
  } else {
    if (cp.lambda_tilde_infinite)
      throw NonIntegralCorner("beamform load is undefined at M_r = N (no messages are needed)");
    detail::require(cp.lambda_tilde.integral, "beamform load requires integral lambda_tilde");
    const int lt = cp.lambda_tilde.rounded;
    nl.p = 1;
    nl.q = lt;
    nl.num_messages = std::min(cfg.num_files, K) * binomial(L, lt);
    nl.v_pq = (1.0 - cfg.rx_mem / cfg.num_files) / binomial(L, lt);
  }
  return nl;
}

}  // namespace cachebeam
