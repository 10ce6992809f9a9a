#pragma once

/*
 * Upper bounds on the bits per unit energy.
 *
 * Single-receiver side (K = 1): a MAC cut-set bound. Separating a
 * transmitter subset from its complement bounds the rate by a MISO capacity
 * term over the conditional input covariance, divided by the library
 * fraction not coverable by the complement's caches. A maximizing input
 * covariance can be taken symmetric, Q = ((1-rho)I + rho*11^T)P, which
 * collapses the matrix search to one scalar; the inner maximum over rho has
 * the closed form psi_closed_form below. The search is kept over real
 * symmetric matrices: with unit-modulus gains normalized to one and an
 * all-ones combining direction, complex phases add nothing to 1^T Q 1.
 *
 * Single-transmitter side (L = 1, M_t = N): a broadcast bound obtained by
 * serving s users over floor(N/s) request rounds; s values whose per-round
 * library floor(N/s) does not exceed M_r carry no information and are
 * skipped.
 *
 * Bounds report the P -> 0 limit analytically (log2(1+x) <= x/ln2); the
 * log-scale objective is exposed via phi_t for finite-P diagnostics and for
 * the randomized oracles.
 */

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cachebeam/core.hpp"
#include "cachebeam/rng.hpp"

namespace cachebeam {

struct SingularBlock : Error {
  using Error::Error;
};
struct NoAdmissibleT : Error {
  using Error::Error;
};
struct DimensionTooSmall : Error {
  using Error::Error;
};

using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Covariance utilities

inline Matrix symmetric_covariance(int dim, double rho, double power) {
  Matrix q = Matrix::Constant(dim, dim, rho * power);
  q.diagonal().setConstant(power);
  return q;
}

inline double min_eigenvalue(const Matrix& q) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// PSD within tolerance and diagonal within the per-transmitter power budget.
inline bool is_valid_covariance(const Matrix& q, double power) {
  if (q.rows() != q.cols()) return false;
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
  if (q.diagonal().maxCoeff() > power + 1e-12) return false;
  return min_eigenvalue(q) >= -1e-9;
}

// Q_{S|S^c} = Q_SS - Q_S,Sc * Q_Sc,Sc^{-1} * Q_Sc,S. A singular complement
// block (rho at the PSD boundary) is lifted by 1e-12*I first.
inline Matrix schur_complement(const Matrix& q, std::uint64_t subset_mask) {
  const int dim = static_cast<int>(q.rows());
  std::vector<int> in, out;
  for (int i = 0; i < dim; ++i)
    ((subset_mask >> i) & 1 ? in : out).push_back(i);
  Matrix q_ss(in.size(), in.size());
  for (std::size_t a = 0; a < in.size(); ++a)
    for (std::size_t b = 0; b < in.size(); ++b) q_ss(a, b) = q(in[a], in[b]);
  if (out.empty()) return q_ss;

  Matrix q_cc(out.size(), out.size());
  for (std::size_t a = 0; a < out.size(); ++a)
    for (std::size_t b = 0; b < out.size(); ++b) q_cc(a, b) = q(out[a], out[b]);
  Matrix q_sc(in.size(), out.size());
  for (std::size_t a = 0; a < in.size(); ++a)
    for (std::size_t b = 0; b < out.size(); ++b) q_sc(a, b) = q(in[a], out[b]);

  Eigen::SelfAdjointEigenSolver<Matrix> es(q_cc, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < 1e-12)
    q_cc += 1e-12 * Matrix::Identity(q_cc.rows(), q_cc.cols());
  const Matrix solved = q_cc.ldlt().solve(q_sc.transpose());
  if (!solved.allFinite())
    throw SingularBlock("complement covariance block is singular beyond regularization");
  return q_ss - q_sc * solved;
}

// min over subsets of size t of log2(1 + 1^T Q_{S|S^c} 1).
inline double phi_t(const Matrix& q, int t) {
  const int dim = static_cast<int>(q.rows());
  double best = std::numeric_limits<double>::infinity();
  for_each_subset(dim, t, [&](std::uint64_t mask) {
    const Matrix s = schur_complement(q, mask);
    const double val = std::max(0.0, s.sum());
    best = std::min(best, std::log2(1.0 + val));
  });
  return best;
}

// ---------------------------------------------------------------------------
// Symmetric-family closed forms

// t * (1 + (t-1)rho - t(L-t)rho^2 / (1 + (L-t-1)rho)): the linearized
// cut-set objective 1^T Q_{S|S^c} 1 / P for the symmetric covariance family.
inline double symmetric_inner_objective(int t, int dim, double rho) {
  if (t == dim) return t * (1.0 + (t - 1.0) * rho);  // no interference term
  const double denom = 1.0 + (dim - t - 1.0) * rho;
  return t * (1.0 + (t - 1.0) * rho - t * (dim - t) * rho * rho / denom);
}

// Maximizing correlation for the inner objective at subset size t.
inline double rho_star(int t, int dim) {
  if (dim < 2) throw DimensionTooSmall("rho is undefined for a single transmitter");
  if (t == dim) return 1.0;  // objective linear in rho
  if (t == dim - 1) return (dim - 2.0) / (2.0 * (dim - 1.0));
  return (-1.0 + std::sqrt(t * (dim - t) / (dim - 1.0))) / (dim - t - 1.0);
}

// max over rho in [-1/(L-1), 1] of the inner objective.
inline double psi_closed_form(int t, int dim) {
  if (dim == 1) return 1.0;
  if (t == dim) return static_cast<double>(dim) * dim;
  if (t == dim - 1) return static_cast<double>(dim) * dim / 4.0;
  const double root = (std::sqrt(static_cast<double>(t) * (dim - t)) - std::sqrt(dim - 1.0)) /
                      (dim - t - 1.0);
  return t * (1.0 + root * root);
}

struct PsiGridResult {
  double value = 0.0;
  double rho = 0.0;
};

// Brute-force grid search over rho; the independent check of the closed form.
inline PsiGridResult psi_grid_oracle(int t, int dim, double rho_step) {
  if (dim == 1) return {1.0, 0.0};
  const double lo = -1.0 / (dim - 1.0);
  const double hi = 1.0;
  const std::int64_t steps = static_cast<std::int64_t>(std::ceil((hi - lo) / rho_step));
  PsiGridResult best{-std::numeric_limits<double>::infinity(), lo};
  for (std::int64_t i = 0; i <= steps; ++i) {
    const double rho = std::min(lo + i * rho_step, hi);
    const double val = symmetric_inner_objective(t, dim, rho);
    if (val > best.value) best = {val, rho};
  }
  return best;
}

// ---------------------------------------------------------------------------
// MAC cut-set bound (K = 1)

struct MacBound {
  double value_per_unit_energy = 0.0;
  int minimizing_t = 0;
  std::optional<double> maximizing_rho;  // unset for L = 1
};

namespace detail {

inline bool t_admissible(int t, const SystemConfig& cfg) {
  const double slack = 1e-12 * std::max(1.0, static_cast<double>(cfg.num_files));
  return (cfg.num_tx - t) * cfg.tx_mem + cfg.rx_mem < cfg.num_files - slack;
}

}  // namespace detail

// psi_table[t-1] must hold psi_closed_form(t, L); lets sweeps reuse it.
inline MacBound mac_upper_bound_with_psi(const SystemConfig& cfg,
                                         const std::vector<double>& psi_table) {
  if (cfg.num_rx != 1) throw Error("the MAC cut-set bound requires K = 1");
  const int L = cfg.num_tx;
  MacBound out;
  if (full_rx_cache(cfg)) {
    out.value_per_unit_energy = kInfiniteRate;
    out.minimizing_t = L;
    return out;
  }
  bool found = false;
  for (int t = 1; t <= L; ++t) {
    if (!detail::t_admissible(t, cfg)) continue;
    const double denom = 1.0 - (cfg.rx_mem + (L - t) * cfg.tx_mem) / cfg.num_files;
    const double val = psi_table[t - 1] / denom / kLn2;
    if (!found || val < out.value_per_unit_energy) {
      out.value_per_unit_energy = val;
      out.minimizing_t = t;
      found = true;
    }
  }
  if (!found) throw NoAdmissibleT("no transmitter-subset size satisfies the cut condition");
  if (L >= 2) out.maximizing_rho = rho_star(out.minimizing_t, L);
  return out;
}

inline MacBound mac_upper_bound(const SystemConfig& cfg) {
  std::vector<double> psi(cfg.num_tx);
  for (int t = 1; t <= cfg.num_tx; ++t) psi[t - 1] = psi_closed_form(t, cfg.num_tx);
  return mac_upper_bound_with_psi(cfg, psi);
}

// ---------------------------------------------------------------------------
// Randomized oracle for the MAC bound

// Draws A with i.i.d. standard normal entries, forms AA^T, and rescales rows
// and columns so the diagonal sits exactly on the power budget (maxima live
// on that boundary).
inline Matrix random_psd_with_diagonal(int dim, double power, const CounterRng& rng,
                                       std::uint64_t stream) {
  Matrix a(dim, dim);
  std::uint64_t ctr = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const double u1 = 1.0 - rng.uniform01(stream, ctr++);  // (0, 1]
      const double u2 = rng.uniform01(stream, ctr++);
      a(i, j) = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }
  }
  Matrix q = a * a.transpose();
  Eigen::VectorXd scale(dim);
  for (int i = 0; i < dim; ++i) scale(i) = std::sqrt(power / std::max(q(i, i), 1e-150));
  q = scale.asDiagonal() * q * scale.asDiagonal();
  q.diagonal().setConstant(power);
  return q;
}

struct MacOracleResult {
  double value = 0.0;            // max of the two searches
  double symmetric_value = 0.0;  // rho-grid over the symmetric family
  double random_value = 0.0;     // random-PSD search (L <= 4), -inf if skipped
  double rho_at_max = 0.0;
};

namespace detail {

// Linearized per-unit-energy cut-set objective for one covariance: min over
// admissible subsets of (1^T Q_{S|S^c} 1 / P) / ((1 - coverage) * ln2).
inline double cutset_objective(const Matrix& q, const SystemConfig& cfg, bool all_subsets) {
  const int L = cfg.num_tx;
  double best = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= L; ++t) {
    if (!t_admissible(t, cfg)) continue;
    const double denom =
        (1.0 - (cfg.rx_mem + (L - t) * cfg.tx_mem) / cfg.num_files) * kLn2 * cfg.power;
    if (all_subsets) {
      for_each_subset(L, t, [&](std::uint64_t mask) {
        const double val = std::max(0.0, schur_complement(q, mask).sum());
        best = std::min(best, val / denom);
      });
    } else {
      // Symmetric input: every subset of one size gives the same value.
      const std::uint64_t mask = (std::uint64_t{1} << t) - 1;
      const double val = std::max(0.0, schur_complement(q, mask).sum());
      best = std::min(best, val / denom);
    }
  }
  return best;
}

}  // namespace detail

// Grid search over the symmetric family (through the Schur-complement path,
// not the algebraic shortcut) plus a random-PSD search for L <= 4. Neither
// may exceed mac_upper_bound by more than numerical tolerance.
inline MacOracleResult mac_upper_bound_oracle(const SystemConfig& cfg, double rho_step,
                                              int psd_samples, std::uint64_t seed) {
  if (cfg.num_rx != 1) throw Error("the MAC cut-set oracle requires K = 1");
  const int L = cfg.num_tx;
  MacOracleResult res;
  res.random_value = -std::numeric_limits<double>::infinity();

  const double lo = L >= 2 ? -1.0 / (L - 1.0) : 0.0;
  const std::int64_t steps =
      L >= 2 ? static_cast<std::int64_t>(std::ceil((1.0 - lo) / rho_step)) : 0;
  res.symmetric_value = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i <= steps; ++i) {
    const double rho = std::min(lo + i * rho_step, 1.0);
    const Matrix q = symmetric_covariance(L, rho, cfg.power);
    const double val = detail::cutset_objective(q, cfg, /*all_subsets=*/false);
    if (val > res.symmetric_value) {
      res.symmetric_value = val;
      res.rho_at_max = rho;
    }
  }

  if (L <= 4 && psd_samples > 0) {
    const CounterRng rng(seed);
    for (int s = 0; s < psd_samples; ++s) {
      const Matrix q = random_psd_with_diagonal(L, cfg.power, rng, static_cast<std::uint64_t>(s));
      res.random_value =
          std::max(res.random_value, detail::cutset_objective(q, cfg, /*all_subsets=*/true));
    }
  }
  res.value = std::max(res.symmetric_value, res.random_value);
  return res;
}

// ---------------------------------------------------------------------------
// Broadcast bound (L = 1, M_t = N)

struct BcBound {
  double value_per_unit_energy = 0.0;
  int minimizing_s = 0;  // 0 when the bound is infinite (M_r = N)
};

inline BcBound bc_upper_bound(const SystemConfig& cfg) {
  if (cfg.num_tx != 1) throw Error("the broadcast bound requires L = 1");
  if (std::abs(cfg.tx_mem - cfg.num_files) > kIntegralTol)
    throw Error("the broadcast bound requires M_t = N");
  const int N = cfg.num_files, K = cfg.num_rx;
  BcBound out;
  out.value_per_unit_energy = kInfiniteRate;
  for (int s = 1; s <= K; ++s) {
    const int rounds = N / s;  // floor(N/s) request rounds
    if (cfg.rx_mem >= rounds - kIntegralTol) continue;  // cache covers the rounds: non-binding
    const double val = 1.0 / (s * (1.0 - cfg.rx_mem / rounds)) / kLn2;
    if (val < out.value_per_unit_energy) {
      out.value_per_unit_energy = val;
      out.minimizing_s = s;
    }
  }
  return out;
}

// max{kappa+1, K/N} / (K - kappa) / ln2: what the better of the two schemes
// achieves in the broadcast configuration at an integral receiver corner.
inline double bc_achievable_bound(const SystemConfig& cfg) {
  if (cfg.num_tx != 1) throw Error("the broadcast achievable bound requires L = 1");
  const CornerParams cp = corner_params(cfg);
  if (!cp.kappa.integral)
    throw NonIntegralCorner("broadcast achievable bound requires integral kappa");
  const int kappa = cp.kappa.rounded;
  const int K = cfg.num_rx;
  if (kappa >= K) return kInfiniteRate;
  const double num = std::max(kappa + 1.0, static_cast<double>(K) / cfg.num_files);
  return num / (K - kappa) / kLn2;
}

}  // namespace cachebeam
