#pragma once

/*
 * Core problem-instance types for cache-aided interference networks in the
 * low-SNR (capacity per unit energy) regime, plus the small combinatorial
 * toolbox shared by the placement, rate, and bound modules.
 *
 * Conventions used throughout the library:
 *   - File, receiver, and transmitter ids are 1-based.
 *   - Subsets are encoded as bitmasks; bit i corresponds to id i+1.
 *   - File size is normalized to 1; cache sizes and loads are in files.
 *   - Rates are per-user bits per channel use per unit power, in the P -> 0
 *     limit. An unbounded rate (receivers cache the whole library) is
 *     represented by +infinity.
 *   - All types are immutable values and all operations are pure, so
 *     everything here is safe to call from concurrent workers.
 */

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cachebeam {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Absolute tolerance for detecting integral cache-sharing levels.
inline constexpr double kIntegralTol = 1e-9;
// Tolerance for sizes that must sum exactly (file partitions).
inline constexpr double kSizeTol = 1e-12;

inline constexpr double kInfiniteRate = std::numeric_limits<double>::infinity();

inline bool is_infinite_rate(double r) { return std::isinf(r) && r > 0; }

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A memory-sharing level that must be integral for a combinatorial
// construction is not.
struct NonIntegralCorner : Error {
  using Error::Error;
};

// Neither scheme can operate at the requested memory point.
struct NoSchemeApplicable : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Combinatorics

// Exact for every n <= 60 that arises here; callers never need larger.
inline double binomial(int n, int k) {
  if (k < 0 || k > n || n < 0) return 0.0;
  k = std::min(k, n - k);
  if (n <= 60) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
    return static_cast<double>(r);
  }
  double lg = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::round(std::exp(lg));
}

// Visits every k-subset of {0,...,n-1} as a bitmask, in increasing numeric
// order (Gosper's hack), so enumeration order is canonical everywhere.
template <typename F>
void for_each_subset(int n, int k, F&& fn) {
  if (k < 0 || k > n) return;
  if (k == 0) {
    fn(std::uint64_t{0});
    return;
  }
  std::uint64_t mask = (std::uint64_t{1} << k) - 1;
  const std::uint64_t limit = std::uint64_t{1} << n;
  while (mask < limit) {
    fn(mask);
    const std::uint64_t c = mask & (~mask + 1);
    const std::uint64_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;
  }
}

inline std::vector<int> mask_to_ids(std::uint64_t mask) {
  std::vector<int> ids;
  for (int i = 0; mask != 0; ++i, mask >>= 1)
    if (mask & 1) ids.push_back(i + 1);
  return ids;
}

inline std::uint64_t ids_to_mask(const std::vector<int>& ids) {
  std::uint64_t mask = 0;
  for (int id : ids) mask |= std::uint64_t{1} << (id - 1);
  return mask;
}

inline bool is_integral(double v) { return std::abs(v - std::round(v)) <= kIntegralTol; }

// ---------------------------------------------------------------------------
// System parameters

// A problem instance: N files, K receivers behind an L-transmitter Gaussian
// interference network, per-receiver cache M_r and per-transmitter cache M_t
// (both in files), and per-transmitter power constraint P (noise-normalized).
struct SystemConfig {
  int num_files = 0;    // N
  int num_rx = 0;       // K
  int num_tx = 0;       // L
  double rx_mem = 0.0;  // M_r in [0, N]
  double tx_mem = 0.0;  // M_t in [0, N]
  double power = 0.0;   // P > 0
};

enum class ConfigViolation {
  non_positive_dimension,
  mem_out_of_range,
  library_not_storable,
};

struct ConfigError {
  ConfigViolation kind;
  std::string message;
};

// Returns the list of violated constraints; empty means the config is usable.
// L*M_t + M_r >= N must hold for any delivery to work at all: otherwise part
// of the library is cached nowhere and cannot reach the receivers.
inline std::vector<ConfigError> validate_config(const SystemConfig& cfg) {
  std::vector<ConfigError> errors;
  auto add = [&](ConfigViolation kind, std::string msg) {
    errors.push_back(ConfigError{kind, std::move(msg)});
  };
  if (cfg.num_files < 1 || cfg.num_rx < 1 || cfg.num_tx < 1)
    add(ConfigViolation::non_positive_dimension, "N, K, and L must all be positive integers");
  if (!(cfg.power > 0.0))
    add(ConfigViolation::non_positive_dimension, "P must be positive");
  if (cfg.num_files >= 1) {
    const double n = cfg.num_files;
    const double slop = 1e-12 * std::max(1.0, n);
    if (cfg.rx_mem < -slop || cfg.rx_mem > n + slop)
      add(ConfigViolation::mem_out_of_range, "M_r must lie in [0, N]");
    if (cfg.tx_mem < -slop || cfg.tx_mem > n + slop)
      add(ConfigViolation::mem_out_of_range, "M_t must lie in [0, N]");
    if (cfg.num_tx >= 1 && cfg.num_tx * cfg.tx_mem + cfg.rx_mem < n - kIntegralTol)
      add(ConfigViolation::library_not_storable,
          "L*M_t + M_r < N: the library cannot be collectively stored");
  }
  return errors;
}

inline bool is_valid(const SystemConfig& cfg) { return validate_config(cfg).empty(); }

// True when the receivers cache the entire library (M_r = N); every rate
// quantity becomes unbounded at this point.
inline bool full_rx_cache(const SystemConfig& cfg) {
  return cfg.num_files - cfg.rx_mem <= kIntegralTol;
}

// ---------------------------------------------------------------------------
// Cache-sharing corner levels

struct CornerValue {
  double value = 0.0;
  bool integral = false;
  int rounded = 0;  // meaningful only when integral
};

inline CornerValue make_corner_value(double v) {
  CornerValue cv;
  cv.value = v;
  const double r = std::round(v);
  cv.integral = std::abs(v - r) <= kIntegralTol;
  cv.rounded = cv.integral ? static_cast<int>(r) : 0;
  return cv;
}

// The three sharing levels that parameterize the combinatorial constructions:
//   kappa        = K*M_r/N        receivers sharing a file part
//   lambda       = L*M_t/N        transmitters sharing a sublibrary
//   lambda_tilde = min{L*M_t/(N-M_r), L}
//                                 transmitters sharing a non-common file part
// Each is flagged integral or not; non-integral values keep their real value
// for the memory-sharing interpolation path. lambda_tilde is reported as an
// explicit infinite marker when M_r = N.
struct CornerParams {
  CornerValue kappa;
  CornerValue lambda;
  CornerValue lambda_tilde;
  bool lambda_tilde_infinite = false;
};

inline CornerParams corner_params(const SystemConfig& cfg) {
  CornerParams cp;
  const double n = cfg.num_files;
  cp.kappa = make_corner_value(cfg.num_rx * cfg.rx_mem / n);
  cp.lambda = make_corner_value(cfg.num_tx * cfg.tx_mem / n);
  const double residual = n - cfg.rx_mem;
  if (residual <= kIntegralTol) {
    cp.lambda_tilde_infinite = true;
    cp.lambda_tilde = CornerValue{std::numeric_limits<double>::infinity(), false, 0};
  } else {
    cp.lambda_tilde = make_corner_value(
        std::min(cfg.num_tx * cfg.tx_mem / residual, static_cast<double>(cfg.num_tx)));
  }
  return cp;
}

// ---------------------------------------------------------------------------
// Demands

// One requested file id per receiver.
struct Demand {
  std::vector<int> requests;  // length K, entries in {1,...,N}
};

// Lowest file ids first, cycling, so the number of distinct requests is
// exactly min{N, K}. The symmetric rate is defined over the worst demand.
inline Demand worst_case_demand(const SystemConfig& cfg) {
  const int distinct = std::min(cfg.num_files, cfg.num_rx);
  Demand d;
  d.requests.resize(cfg.num_rx);
  for (int k = 0; k < cfg.num_rx; ++k) d.requests[k] = k % distinct + 1;
  return d;
}

inline bool demand_in_range(const Demand& d, const SystemConfig& cfg) {
  if (static_cast<int>(d.requests.size()) != cfg.num_rx) return false;
  return std::all_of(d.requests.begin(), d.requests.end(),
                     [&](int f) { return f >= 1 && f <= cfg.num_files; });
}

inline int distinct_request_count(const Demand& d) {
  std::vector<int> r = d.requests;
  std::sort(r.begin(), r.end());
  return static_cast<int>(std::unique(r.begin(), r.end()) - r.begin());
}

// ---------------------------------------------------------------------------
// Channel state

// One fading realization: the K x L matrix of phases of the unit-magnitude
// channel gains g_{k,l} = exp(j*theta_{k,l}), each in [0, 2*pi).
struct ChannelState {
  int num_rx = 0;
  int num_tx = 0;
  std::vector<double> phases;  // row-major K x L

  double phase(int rx, int tx) const { return phases[(rx - 1) * num_tx + (tx - 1)]; }
  double& phase(int rx, int tx) { return phases[(rx - 1) * num_tx + (tx - 1)]; }
};

inline ChannelState make_channel(int num_rx, int num_tx) {
  ChannelState ch;
  ch.num_rx = num_rx;
  ch.num_tx = num_tx;
  ch.phases.assign(static_cast<std::size_t>(num_rx) * num_tx, 0.0);
  return ch;
}

// ---------------------------------------------------------------------------
// Message specifications

// The address of one bit pipe: sent collectively by the transmitters in
// tx_subset, intended for the receivers in rx_subset. Subsets are sorted,
// duplicate-free, 1-based.
struct MessageSpec {
  std::vector<int> rx_subset;
  std::vector<int> tx_subset;

  friend bool operator==(const MessageSpec&, const MessageSpec&) = default;
  friend auto operator<=>(const MessageSpec&, const MessageSpec&) = default;
};

inline MessageSpec make_spec(std::uint64_t rx_mask, std::uint64_t tx_mask) {
  return MessageSpec{mask_to_ids(rx_mask), mask_to_ids(tx_mask)};
}

inline bool spec_in_range(const MessageSpec& spec, int num_rx, int num_tx) {
  auto ok = [](const std::vector<int>& ids, int limit) {
    if (ids.empty()) return false;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] < 1 || ids[i] > limit) return false;
      if (i > 0 && ids[i] <= ids[i - 1]) return false;
    }
    return true;
  };
  return ok(spec.rx_subset, num_rx) && ok(spec.tx_subset, num_tx);
}

}  // namespace cachebeam
