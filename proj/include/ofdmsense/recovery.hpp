#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "config.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "siggen.hpp"

namespace ofdmsense {

struct RecoveryResult {
  SupportSet support_est;
  std::optional<int> d_est;  // absent when the offset was given
  // Joint-LS path: s_hat restricted to the support, grouped by symbol
  // index 0..N_b, ascending support order within each group. Projection
  // paths: per-frame fits, grouped by frame, ascending support order.
  Vec coeffs;
  double residual_sq = 0.0;  // ||z - B_{d,S} s_hat||^2 in measurement space
  int iterations = 0;        // alternation sweeps; 0 for known-offset calls
};

/// Joint greedy recovery over all captured frames at a known offset in
/// the full-rank regime K <= d <= N-K. Exactly K iterations; each selects
/// the subcarrier whose stacked atom [b2; b1] correlates best with the
/// stacked residual pairs [r[n-1]; r[n]] (r[0] = 0), then refits all
/// selected subcarriers jointly and deflates the residual.
inline RecoveryResult omp_joint(const std::vector<Vec>& z_frames, const BlockDictionary& dict,
                                const OfdmConfig& cfg) {
  const int n_blocks = cfg.n_blocks;
  const int k = cfg.k;
  const Eigen::Index m = dict.b1.rows();
  const int n_sub = static_cast<int>(dict.b1.cols());
  if (static_cast<int>(z_frames.size()) != n_blocks)
    throw std::invalid_argument("omp_joint: frame count disagrees with the configuration");
  if (dict.d < k || dict.d > cfg.n_total - k)
    throw std::invalid_argument("omp_joint: offset outside the joint-recovery regime");

  Vec z(m * n_blocks);
  Mat resid(m, n_blocks);
  for (int i = 0; i < n_blocks; ++i) {
    if (z_frames[i].size() != m) throw std::invalid_argument("omp_joint: frame length mismatch");
    z.segment(i * m, m) = z_frames[i];
    resid.col(i) = z_frames[i];
  }

  const Eigen::Index total_cols = static_cast<Eigen::Index>(k) * (n_blocks + 1);
  IncrementalQr qr(z, total_cols);
  Mat bsel(m * n_blocks, total_cols);
  std::vector<int> selected;
  selected.reserve(k);
  std::vector<char> taken(n_sub, 0);
  double prev_res = z.squaredNorm();
  const double res_slack = 1e-9 * (prev_res + 1.0);
  Vec x;

  for (int it = 0; it < k; ++it) {
    // score(j) = sum_n |b2_j^H r[n-1] + b1_j^H r[n]|, the n=1 term having
    // no previous frame
    Mat c1 = dict.b1.adjoint() * resid;
    Mat c2 = dict.b2.adjoint() * resid;
    int best = -1;
    double best_score = -1.0;
    for (int j = 0; j < n_sub; ++j) {
      if (taken[j]) continue;
      double sc = std::abs(c1(j, 0));
      for (int t = 1; t < n_blocks; ++t) sc += std::abs(c2(j, t - 1) + c1(j, t));
      if (sc > best_score) {  // strict: ties go to the lowest index
        best_score = sc;
        best = j;
      }
    }
    taken[best] = 1;
    selected.push_back(best);

    Mat group(m * n_blocks, n_blocks + 1);
    for (int p = 0; p <= n_blocks; ++p) group.col(p) = dictionary_column(dict, n_blocks, p, best);
    bsel.middleCols(static_cast<Eigen::Index>(it) * (n_blocks + 1), n_blocks + 1) = group;

    bool healthy = qr.append(group);
    const Eigen::Index ncols = qr.cols();
    if (!healthy && numerical_rank(bsel.leftCols(ncols)) < ncols)
      throw std::runtime_error(
          "omp_joint: restricted dictionary lost column rank; the offset-regime precondition does not hold");

    x = qr.solve();
    Vec r = z - bsel.leftCols(ncols) * x;
    double res = r.squaredNorm();
    if (res > prev_res + res_slack)
      throw std::logic_error("omp_joint: residual grew across an iteration");
    prev_res = res;
    for (int i = 0; i < n_blocks; ++i) resid.col(i) = r.segment(i * m, m);
  }

  RecoveryResult out;
  out.support_est = SupportSet(selected);
  std::vector<int> pos(n_sub, -1);
  for (int t = 0; t < k; ++t) pos[out.support_est.indices[t]] = t;
  out.coeffs.resize(total_cols);
  for (int t = 0; t < k; ++t)
    for (int p = 0; p <= n_blocks; ++p)
      out.coeffs(static_cast<Eigen::Index>(p) * k + pos[selected[t]]) =
          x(static_cast<Eigen::Index>(t) * (n_blocks + 1) + p);
  out.residual_sq = prev_res;
  return out;
}

struct SompResult {
  SupportSet support;
  Mat coeffs;               // |S| x n_frames, rows in ascending support order
  double residual_sq = 0.0; // summed over frames, in the atoms' space
};

/// Simultaneous OMP over a shared dictionary: per iteration, select the
/// atom with the largest summed absolute correlation against all frame
/// residuals, then refit every frame on the accumulated support. The
/// refit uses a rank-aware factorization, so a degenerate sub-dictionary
/// degrades to the minimum-norm fit instead of failing.
inline SompResult somp_detailed(const std::vector<Vec>& frames, const Mat& atoms, int k) {
  const Eigen::Index rows = atoms.rows();
  const int n_atoms = static_cast<int>(atoms.cols());
  const int n_frames = static_cast<int>(frames.size());
  if (k < 1 || k > n_atoms) throw std::invalid_argument("somp: k out of range");
  if (n_frames == 0) throw std::invalid_argument("somp: no frames");
  Mat resid(rows, n_frames);
  for (int f = 0; f < n_frames; ++f) {
    if (frames[f].size() != rows) throw std::invalid_argument("somp: frame length mismatch");
    resid.col(f) = frames[f];
  }
  Mat rhs = resid;
  std::vector<int> selected;
  selected.reserve(k);
  std::vector<char> taken(n_atoms, 0);
  Mat sub(rows, k);
  Mat x;
  for (int it = 0; it < k; ++it) {
    RealVec score = (atoms.adjoint() * resid).cwiseAbs().rowwise().sum();
    int best = -1;
    double best_score = -1.0;
    for (int j = 0; j < n_atoms; ++j) {
      if (taken[j]) continue;
      if (score(j) > best_score) {
        best_score = score(j);
        best = j;
      }
    }
    taken[best] = 1;
    selected.push_back(best);
    sub.col(it) = atoms.col(best);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(sub.leftCols(it + 1));
    x = cod.solve(rhs);
    resid = rhs - sub.leftCols(it + 1) * x;
  }
  SompResult out;
  out.support = SupportSet(selected);
  out.coeffs.resize(k, n_frames);
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return selected[a] < selected[b]; });
  for (int t = 0; t < k; ++t) out.coeffs.row(t) = x.row(order[t]);
  out.residual_sq = resid.squaredNorm();
  return out;
}

inline SupportSet somp(const std::vector<Vec>& frames, const Mat& atoms, int k) {
  return somp_detailed(frames, atoms, k).support;
}

/// Known-offset recovery against a prebuilt dictionary. Dispatch:
/// K <= d <= N-K runs the joint OMP; outside that regime one dictionary
/// factor cannot be separated, so its column space is projected out and
/// SOMP runs on the projected other factor. residual_sq is always the
/// unprojected distance from z to the column space of B_{d,S}, so results
/// from different paths compare directly.
inline RecoveryResult recover_with_dictionary(const CompressedStream& z, const BlockDictionary& dict,
                                              const OfdmConfig& cfg) {
  const int d = dict.d;
  if (d >= cfg.k && d <= cfg.n_total - cfg.k) return omp_joint(z.frames, dict, cfg);

  const bool below = d < cfg.k;
  const Mat& blocked = below ? dict.b1 : dict.b2;  // the factor projected away
  const Mat& kept = below ? dict.b2 : dict.b1;
  Mat proj = column_space_annihilator(blocked);
  Mat atoms = proj * kept;
  std::vector<Vec> pframes;
  pframes.reserve(z.frames.size());
  for (const Vec& f : z.frames) pframes.push_back(proj * f);
  SompResult sr = somp_detailed(pframes, atoms, cfg.k);

  RecoveryResult out;
  out.support_est = sr.support;
  const int n_frames = static_cast<int>(z.frames.size());
  out.coeffs.resize(static_cast<Eigen::Index>(cfg.k) * n_frames);
  for (int f = 0; f < n_frames; ++f)
    for (int t = 0; t < cfg.k; ++t) out.coeffs(static_cast<Eigen::Index>(f) * cfg.k + t) = sr.coeffs(t, f);
  out.residual_sq =
      projection_residual_sq(restrict_support(dict, sr.support, cfg.n_blocks), z.stacked);
  return out;
}

inline RecoveryResult recover_known_offset(const CompressedStream& z, const MeasurementMatrix& a,
                                           int d, const OfdmConfig& cfg) {
  if (d < 0 || d >= cfg.n_total)
    throw std::invalid_argument("recover_known_offset: offset out of range");
  PartitionedIdft p = partition_idft(extended_idft(cfg), d);
  return recover_with_dictionary(z, dictionary_pair(a, p), cfg);
}

/// Least-squares fit of z on a fixed support, no greedy selection. Same
/// dispatch and output layout as recover_with_dictionary: joint fit with
/// symbol-major coefficients inside the K <= d <= N-K regime, per-frame
/// fits on the projected factor outside it.
inline RecoveryResult fit_support(const CompressedStream& z, const BlockDictionary& dict,
                                  const OfdmConfig& cfg, const SupportSet& s) {
  RecoveryResult out;
  out.support_est = s;
  if (dict.d >= cfg.k && dict.d <= cfg.n_total - cfg.k) {
    LsSolution sol = solve_least_squares(restrict_support(dict, s, cfg.n_blocks), z.stacked);
    out.coeffs = sol.coeffs;
    out.residual_sq = sol.residual_sq;
    return out;
  }
  const bool below = dict.d < cfg.k;
  const Mat& blocked = below ? dict.b1 : dict.b2;
  const Mat& kept = below ? dict.b2 : dict.b1;
  Mat proj = column_space_annihilator(blocked);
  Mat atoms_s(proj.rows(), s.size());
  for (int t = 0; t < s.size(); ++t) atoms_s.col(t) = proj * kept.col(s.indices[t]);
  const int n_frames = static_cast<int>(z.frames.size());
  Mat rhs(proj.rows(), n_frames);
  for (int f = 0; f < n_frames; ++f) rhs.col(f) = proj * z.frames[f];
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(atoms_s);
  Mat x = cod.solve(rhs);
  out.coeffs.resize(static_cast<Eigen::Index>(s.size()) * n_frames);
  for (int f = 0; f < n_frames; ++f)
    for (int t = 0; t < s.size(); ++t)
      out.coeffs(static_cast<Eigen::Index>(f) * s.size() + t) = x(t, f);
  out.residual_sq = projection_residual_sq(restrict_support(dict, s, cfg.n_blocks), z.stacked);
  return out;
}

namespace detail {
inline double objective_with_dictionary(const BlockDictionary& dict, const Vec& z_stacked,
                                        const SupportSet& support, const OfdmConfig& cfg) {
  Mat bs = restrict_support(dict, support, cfg.n_blocks);
  double rsq;
  if (dict.d >= cfg.k && dict.d <= cfg.n_total - cfg.k)
    rsq = solve_least_squares(bs, z_stacked).residual_sq;
  else
    rsq = projection_residual_sq(bs, z_stacked);  // deficient by construction out here
  return rsq / static_cast<double>(z_stacked.size());
}
}  // namespace detail

/// Per-dimension energy of z left outside the column space of B_{d,S}.
/// The candidate-offset score of the alternating estimator.
inline double offset_objective(const Vec& z_stacked, int d, const SupportSet& support,
                               const MeasurementMatrix& a, const OfdmConfig& cfg) {
  if (d < 0 || d >= cfg.n_total) throw std::invalid_argument("offset_objective: offset out of range");
  PartitionedIdft p = partition_idft(extended_idft(cfg), d);
  return detail::objective_with_dictionary(dictionary_pair(a, p), z_stacked, support, cfg);
}

/// Joint offset and support estimation by alternation. The first sweep
/// scans every candidate offset, recovers a support there, and scores the
/// pair; later sweeps hold the current support fixed, rescore every
/// offset against it, move to the argmin, and re-recover the support
/// there, until the offset stops changing or the sweep budget runs out.
/// Recoveries are pure functions of the candidate, so each candidate's
/// support is computed once. The returned pair is the best one scored
/// anywhere along the walk; a cross pair (an offset scored against a
/// support recovered elsewhere) can win, since a failed greedy pass at
/// the true offset leaves exactly that kind of pair as the best fit.
inline RecoveryResult estimate_offset_and_support(const CompressedStream& z,
                                                  const MeasurementMatrix& a, const OfdmConfig& cfg,
                                                  int max_sweeps,
                                                  const std::vector<int>& candidates = {}) {
  if (max_sweeps < 1)
    throw std::invalid_argument("estimate_offset_and_support: max_sweeps must be >= 1");
  std::vector<int> cand = candidates;
  if (cand.empty()) {
    cand.resize(cfg.n_total);
    std::iota(cand.begin(), cand.end(), 0);
  } else {
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (int d : cand)
      if (d < 0 || d >= cfg.n_total)
        throw std::invalid_argument("estimate_offset_and_support: candidate offset out of range");
  }
  const double dim = static_cast<double>(z.stacked.size());
  const Mat f_tilde = extended_idft(cfg);

  std::vector<BlockDictionary> dicts;
  std::vector<RecoveryResult> recovered;
  dicts.reserve(cand.size());
  recovered.reserve(cand.size());
  int best_i = -1;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cand.size(); ++i) {
    dicts.push_back(dictionary_pair(a, partition_idft(f_tilde, cand[i])));
    recovered.push_back(recover_with_dictionary(z, dicts.back(), cfg));
    double obj = recovered.back().residual_sq / dim;
    if (obj < best_obj) {  // strict: ties go to the lowest offset
      best_obj = obj;
      best_i = static_cast<int>(i);
    }
  }

  int cur = best_i;
  SupportSet s_cur = recovered[cur].support_est;
  int best_pair_i = best_i;
  SupportSet best_pair_s = s_cur;
  double best_pair_obj = best_obj;

  int sweeps = 0;
  while (sweeps < max_sweeps) {
    ++sweeps;
    int next = -1;
    double next_obj = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cand.size(); ++i) {
      double obj = detail::objective_with_dictionary(dicts[i], z.stacked, s_cur, cfg);
      if (obj < next_obj) {  // strict: ties go to the lowest offset
        next_obj = obj;
        next = static_cast<int>(i);
      }
    }
    if (next_obj < best_pair_obj) {
      best_pair_obj = next_obj;
      best_pair_i = next;
      best_pair_s = s_cur;
    }
    if (next == cur) break;  // fixed point
    cur = next;
    s_cur = recovered[cur].support_est;
    double cached_obj = recovered[cur].residual_sq / dim;
    if (cached_obj < best_pair_obj) {
      best_pair_obj = cached_obj;
      best_pair_i = cur;
      best_pair_s = s_cur;
    }
  }

  RecoveryResult out;
  if (best_pair_s == recovered[best_pair_i].support_est)
    out = recovered[best_pair_i];
  else
    out = fit_support(z, dicts[best_pair_i], cfg, best_pair_s);
  out.d_est = cand[best_pair_i];
  out.iterations = sweeps;
  return out;
}

}  // namespace ofdmsense
