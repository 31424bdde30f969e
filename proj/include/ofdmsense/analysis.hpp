#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "config.hpp"
#include "linalg.hpp"
#include "model.hpp"

namespace ofdmsense {

/// Smallest cardinality of a linearly dependent column subset, found by
/// exhaustive search with numerical rank as the dependence test. A matrix
/// whose columns are all independent reports column count + 1; a fat
/// full-spark matrix reports row count + 1 (any larger subset must be
/// dependent, so the search finds it).
inline int spark_bruteforce(const Mat& mtx, double rel_tol = 0.0) {
  const int cols = static_cast<int>(mtx.cols());
  const Eigen::Index rows = mtx.rows();
  if (cols < 1) throw std::invalid_argument("spark_bruteforce: matrix has no columns");
  if (cols > 20) throw std::invalid_argument("spark_bruteforce: refusing exhaustive search above 20 columns");
  const int max_size = static_cast<int>(std::min<Eigen::Index>(rows + 1, cols));
  std::vector<int> idx;
  Mat sub(rows, max_size);
  for (int sz = 1; sz <= max_size; ++sz) {
    idx.resize(sz);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      for (int t = 0; t < sz; ++t) sub.col(t) = mtx.col(idx[t]);
      if (numerical_rank(sub.leftCols(sz), rel_tol) < sz) return sz;
      int i = sz - 1;
      while (i >= 0 && idx[i] == cols - sz + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int t = i + 1; t < sz; ++t) idx[t] = idx[t - 1] + 1;
    }
  }
  return cols + 1;
}

/// Checks the spark formulas for both row partitions of the extended
/// IDFT: spark(bottom) = min(N_o, d) + 1 and spark(top) = min(N_o, N-d) + 1.
/// The bottom check is skipped at d = 0, where the partition has no rows
/// and spark is not defined.
inline bool verify_spark_lemma(int n_sub, int n_cp, int d) {
  const int n = n_sub + n_cp;
  if (d < 0 || d > n - 1) throw std::invalid_argument("verify_spark_lemma: offset out of range");
  PartitionedIdft p = partition_idft(extended_idft(n_sub, n_cp), d);
  if (d >= 1 && spark_bruteforce(p.bottom) != std::min(n_sub, d) + 1) return false;
  return spark_bruteforce(p.top) == std::min(n_sub, n - d) + 1;
}

/// dim(range(phi) ∩ range(psi)) for full-column-rank phi, via the rank
/// identity rank(phi) + rank(psi) - rank([phi, psi]).
inline int intersection_dim(const Mat& phi, const Mat& psi, double rel_tol = 0.0) {
  if (phi.rows() != psi.rows()) throw std::invalid_argument("intersection_dim: row count mismatch");
  const int rp = numerical_rank(phi, rel_tol);
  if (rp < phi.cols()) throw std::invalid_argument("intersection_dim: phi must have full column rank");
  Mat joint(phi.rows(), phi.cols() + psi.cols());
  joint.leftCols(phi.cols()) = phi;
  joint.rightCols(psi.cols()) = psi;
  return rp + numerical_rank(psi, rel_tol) - numerical_rank(joint, rel_tol);
}

/// What the intersection dimension must be when psi is drawn from a
/// continuous distribution: P + min(Q, T) - min(Q, P + T) for phi of
/// shape Q x P and psi of shape Q x T.
inline int intersection_dim_closed_form(int q, int p, int t) {
  return p + std::min(q, t) - std::min(q, p + t);
}

enum class RankRegime { below, inside, above };

struct RankReport {
  int d = 0;
  int k = 0;
  int observed_rank = 0;
  int expected_full = 0;  // (N_b + 1) * K
  bool is_full = false;
  RankRegime regime = RankRegime::inside;
};

/// Numerical column rank of the support-restricted block dictionary at
/// offset d, classified against the full-rank regime K <= d <= N-K.
inline RankReport rank_condition_report(const OfdmConfig& cfg, int d, const SupportSet& support,
                                        const MeasurementMatrix& a, const Mat& f_tilde) {
  if (support.size() != cfg.k)
    throw std::invalid_argument("rank_condition_report: support size must equal k");
  BlockDictionary dict = dictionary_pair(a, partition_idft(f_tilde, d));
  Mat bs = restrict_support(dict, support, cfg.n_blocks);
  RankReport rep;
  rep.d = d;
  rep.k = cfg.k;
  rep.observed_rank = numerical_rank(bs);
  rep.expected_full = (cfg.n_blocks + 1) * cfg.k;
  rep.is_full = rep.observed_rank == rep.expected_full;
  rep.regime = d < cfg.k ? RankRegime::below
                         : (d > cfg.n_total - cfg.k ? RankRegime::above : RankRegime::inside);
  return rep;
}

struct RankChain {
  int rank_b1s = 0;
  int rank_b2s = 0;
  int rank_bds = 0;
};

/// The three rank milestones behind the full-rank guarantee: both
/// restricted factors reach rank K and the assembled restriction reaches
/// (N_b + 1) * K. Only meaningful inside the K <= d <= N-K regime.
inline RankChain appendix_rank_chain(const OfdmConfig& cfg, int d, const SupportSet& support,
                                     const MeasurementMatrix& a, const Mat& f_tilde) {
  if (support.size() != cfg.k)
    throw std::invalid_argument("appendix_rank_chain: support size must equal k");
  if (d < cfg.k || d > cfg.n_total - cfg.k)
    throw std::invalid_argument("appendix_rank_chain: offset outside the full-rank regime");
  if (cfg.m <= cfg.k) throw std::invalid_argument("appendix_rank_chain: need m > k");
  BlockDictionary dict = dictionary_pair(a, partition_idft(f_tilde, d));
  const int k = cfg.k;
  Mat b1s(dict.b1.rows(), k), b2s(dict.b2.rows(), k);
  for (int t = 0; t < k; ++t) {
    b1s.col(t) = dict.b1.col(support.indices[t]);
    b2s.col(t) = dict.b2.col(support.indices[t]);
  }
  RankChain chain;
  chain.rank_b1s = numerical_rank(b1s);
  chain.rank_b2s = numerical_rank(b2s);
  chain.rank_bds = numerical_rank(restrict_support(dict, support, cfg.n_blocks));
  return chain;
}

}  // namespace ofdmsense
