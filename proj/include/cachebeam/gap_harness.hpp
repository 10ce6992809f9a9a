#pragma once

/*
 * Parameter sweeps comparing the achievable rates against the converse
 * bounds in the two regimes where a converse is known: the single-
 * transmitter (broadcast) side and the single-receiver (MAC) side.
 *
 * Grids: receiver memory runs over the integral-kappa corners plus a fixed
 * number of uniform interior points per corner interval (broadcast side),
 * or over a uniform [0, N] grid (MAC side, where the corners are just 0 and
 * N); transmitter memory on the MAC side runs over the lambda_tilde corners
 * of [(N-M_r)/L, N] plus interior points. Rows can stream to a sink so the
 * 100x100 grids never need to live in memory. At M_r = N both sides are
 * unbounded and the ratio is defined as 1.
 *
 * Grid points are independent; sweeps fan out across workers when no row
 * sink is attached and merge partial reports in grid order, so reports are
 * identical for any worker count.
 */

#include <functional>
#include <vector>

#include "cachebeam/converse.hpp"
#include "cachebeam/core.hpp"
#include "cachebeam/parallel.hpp"
#include "cachebeam/rate_calc.hpp"

namespace cachebeam {

struct GapRow {
  SystemConfig cfg;
  double achievable = 0.0;
  double converse = 0.0;
  double ratio = 0.0;
};

using GapRowSink = std::function<void(const GapRow&)>;

struct GapReport {
  double max_ratio = 0.0;
  SystemConfig argmax;
  double min_ratio = std::numeric_limits<double>::infinity();
  SystemConfig argmin;
  std::int64_t rows = 0;
  std::int64_t case1_violations = 0;  // MAC side only
  std::int64_t case2_violations = 0;
  std::vector<GapRow> kept;  // populated only when keep_rows is set
};

namespace detail {

inline double gap_ratio(double achievable, double converse) {
  if (is_infinite_rate(achievable) && is_infinite_rate(converse)) return 1.0;
  return converse / achievable;
}

inline void account_row(GapReport& rep, const GapRow& row, bool keep_rows,
                        const GapRowSink* sink) {
  ++rep.rows;
  if (rep.rows == 1 || row.ratio > rep.max_ratio) {
    rep.max_ratio = row.ratio;
    rep.argmax = row.cfg;
  }
  if (row.ratio < rep.min_ratio) {
    rep.min_ratio = row.ratio;
    rep.argmin = row.cfg;
  }
  if (keep_rows) rep.kept.push_back(row);
  if (sink) (*sink)(row);
}

inline void merge_reports(GapReport& into, const GapReport& part) {
  if (part.rows == 0) return;
  if (into.rows == 0 || part.max_ratio > into.max_ratio) {
    into.max_ratio = part.max_ratio;
    into.argmax = part.argmax;
  }
  if (part.min_ratio < into.min_ratio) {
    into.min_ratio = part.min_ratio;
    into.argmin = part.argmin;
  }
  into.rows += part.rows;
  into.case1_violations += part.case1_violations;
  into.case2_violations += part.case2_violations;
  into.kept.insert(into.kept.end(), part.kept.begin(), part.kept.end());
}

// corners plus `interior` uniform points inside each corner interval,
// deduplicated within fp noise.
inline std::vector<double> grid_with_interiors(const std::vector<double>& corners, int interior) {
  std::vector<double> grid;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    if (i > 0) {
      const double a = corners[i - 1], b = corners[i];
      for (int j = 1; j <= interior; ++j) grid.push_back(a + (b - a) * j / (interior + 1.0));
    }
    grid.push_back(corners[i]);
  }
  std::vector<double> out;
  for (double v : grid)
    if (out.empty() || v - out.back() > 1e-12) out.push_back(v);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Broadcast-side sweep (L = 1, M_t = N)

struct BcSweepParams {
  int n_max = 100;
  int k_max = 100;
  int mr_interior = 9;  // interior points per kappa-corner interval
  double power = 0.01;
  bool keep_rows = false;
};

inline GapReport gap_bc_sweep(const BcSweepParams& params, const GapRowSink* sink = nullptr) {
  const std::int64_t tasks = static_cast<std::int64_t>(params.n_max) * params.k_max;
  std::vector<GapReport> parts(tasks);

  auto run_task = [&](std::int64_t idx) {
    const int n = static_cast<int>(idx / params.k_max) + 1;
    const int k = static_cast<int>(idx % params.k_max) + 1;
    GapReport& part = parts[idx];
    std::vector<double> corners;
    for (int kappa = 0; kappa <= k; ++kappa) corners.push_back(kappa * static_cast<double>(n) / k);
    for (double mr : detail::grid_with_interiors(corners, params.mr_interior)) {
      GapRow row;
      row.cfg = SystemConfig{n, k, 1, mr, static_cast<double>(n), params.power};
      const std::optional<double> mc = rate_mc_interpolated(row.cfg);
      const std::optional<double> bf = rate_bf_interpolated(row.cfg);
      row.achievable = std::max(mc.value_or(0.0), bf.value_or(0.0));
      row.converse = bc_upper_bound(row.cfg).value_per_unit_energy;
      row.ratio = detail::gap_ratio(row.achievable, row.converse);
      detail::account_row(part, row, params.keep_rows, sink);
    }
  };

  if (sink) {
    for (std::int64_t i = 0; i < tasks; ++i) run_task(i);
  } else {
    parallel_for_index(tasks, run_task);
  }
  GapReport rep;
  for (const GapReport& part : parts) detail::merge_reports(rep, part);
  return rep;
}

// ---------------------------------------------------------------------------
// MAC-side sweep (K = 1)

struct MacSweepParams {
  int n_max = 100;
  int l_max = 100;
  int mr_interior = 9;  // interior points between the kappa corners 0 and N
  int mt_interior = 9;  // interior points per lambda_tilde corner interval
  double power = 0.01;
  bool keep_rows = false;
};

inline GapReport gap_mac_sweep(const MacSweepParams& params, const GapRowSink* sink = nullptr) {
  const std::int64_t tasks = static_cast<std::int64_t>(params.n_max) * params.l_max;
  std::vector<GapReport> parts(tasks);

  auto run_task = [&](std::int64_t idx) {
    const int n = static_cast<int>(idx / params.l_max) + 1;
    const int l = static_cast<int>(idx % params.l_max) + 1;
    GapReport& part = parts[idx];
    std::vector<double> psi(l);
    for (int t = 1; t <= l; ++t) psi[t - 1] = psi_closed_form(t, l);

    const std::vector<double> mr_grid =
        detail::grid_with_interiors({0.0, static_cast<double>(n)}, params.mr_interior);
    for (double mr : mr_grid) {
      std::vector<double> mt_grid;
      if (n - mr <= kIntegralTol) {
        mt_grid = {static_cast<double>(n)};
      } else {
        std::vector<double> corners;
        for (int j = 1; j <= l; ++j) corners.push_back(j * (n - mr) / l);
        if (corners.back() < n - 1e-12) corners.push_back(static_cast<double>(n));
        mt_grid = detail::grid_with_interiors(corners, params.mt_interior);
      }
      for (double mt : mt_grid) {
        GapRow row;
        row.cfg = SystemConfig{n, 1, l, mr, mt, params.power};
        const std::optional<double> bf = rate_bf_interpolated(row.cfg);
        row.achievable = bf.value_or(0.0);
        row.converse = mac_upper_bound_with_psi(row.cfg, psi).value_per_unit_energy;
        row.ratio = detail::gap_ratio(row.achievable, row.converse);
        // Two-regime accounting: large transmitter caches must stay within a
        // factor 8, the rest within 64.
        if (mt >= (n - mr) / 4.0 - 1e-12) {
          if (row.ratio > 8.0 + 1e-9) ++part.case1_violations;
        } else if (row.ratio > 64.0 + 1e-9) {
          ++part.case2_violations;
        }
        detail::account_row(part, row, params.keep_rows, sink);
      }
    }
  };

  if (sink) {
    for (std::int64_t i = 0; i < tasks; ++i) run_task(i);
  } else {
    parallel_for_index(tasks, run_task);
  }
  GapReport rep;
  for (const GapReport& part : parts) detail::merge_reports(rep, part);
  return rep;
}

// ---------------------------------------------------------------------------
// Case split (K = 1)

struct CaseReport {
  int case_id = 0;       // 1: M_t >= (N-M_r)/4, 2: below
  double proof_bound = 0.0;  // 8 or 64
  int proof_t = 0;       // subset size the two-case argument picks
  bool proof_t_admissible = false;
  double numeric_ratio = 0.0;
  bool within_proof_bound = false;
};

inline CaseReport verify_case_split(const SystemConfig& cfg) {
  if (cfg.num_rx != 1) throw Error("case split applies to K = 1 only");
  const double n = cfg.num_files;
  CaseReport rep;
  const bool case1 = cfg.tx_mem >= (n - cfg.rx_mem) / 4.0 - 1e-12;
  rep.case_id = case1 ? 1 : 2;
  rep.proof_bound = case1 ? 8.0 : 64.0;
  if (case1) {
    rep.proof_t = cfg.num_tx;  // full cooperation cut
  } else {
    rep.proof_t = cfg.num_tx -
                  static_cast<int>(std::floor((n - cfg.rx_mem) / (2.0 * cfg.tx_mem)));
  }
  rep.proof_t_admissible =
      rep.proof_t >= 1 && rep.proof_t <= cfg.num_tx && detail::t_admissible(rep.proof_t, cfg);

  const std::optional<double> bf = rate_bf_interpolated(cfg);
  if (!bf) throw NoSchemeApplicable("case split needs M_t >= (N-M_r)/L");
  const double conv = mac_upper_bound(cfg).value_per_unit_energy;
  rep.numeric_ratio = detail::gap_ratio(*bf, conv);
  rep.within_proof_bound = rep.numeric_ratio <= rep.proof_bound + 1e-9;
  return rep;
}

}  // namespace cachebeam
