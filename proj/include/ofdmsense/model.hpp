#pragma once

#include <stdexcept>
#include <string>

#include "config.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace ofdmsense {

/// Unitary DFT matrix, entry (p, q) = exp(-2*pi*i*p*q/n) / sqrt(n).
inline Mat dft_matrix(int n_sub) {
  if (n_sub < 1) throw std::invalid_argument("dft_matrix: n_sub must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_sub));
  const double w = -2.0 * 3.141592653589793238462643383279502884 / n_sub;
  Mat f(n_sub, n_sub);
  for (int p = 0; p < n_sub; ++p)
    for (int q = 0; q < n_sub; ++q)
      f(p, q) = std::polar(scale, w * static_cast<double>(p) * static_cast<double>(q));
  return f;
}

/// IDFT with cyclic prefix, built as [F_0, F]^H where F_0 holds the last
/// n_cp columns of the DFT matrix F. Shape (n_sub + n_cp) x n_sub; the
/// first n_cp rows duplicate the last n_cp rows.
inline Mat extended_idft(int n_sub, int n_cp) {
  if (n_cp < 0) throw std::invalid_argument("extended_idft: n_cp must be >= 0");
  Mat f = dft_matrix(n_sub);
  Mat with_prefix(n_sub, n_sub + n_cp);
  with_prefix.leftCols(n_cp) = f.rightCols(n_cp);
  with_prefix.rightCols(n_sub) = f;
  return with_prefix.adjoint();
}

inline Mat extended_idft(const OfdmConfig& cfg) { return extended_idft(cfg.n_sub, cfg.n_cp); }

/// Row split of the extended IDFT at a timing offset d: `top` carries the
/// first N-d rows (the part of the current symbol inside the capture
/// window), `bottom` the last d rows (the tail of the previous symbol).
struct PartitionedIdft {
  Mat full;
  int d = 0;
  Mat top;
  Mat bottom;
};

inline PartitionedIdft partition_idft(const Mat& f_tilde, int d) {
  const Eigen::Index n = f_tilde.rows();
  if (d < 0 || d >= n)
    throw std::invalid_argument("partition_idft: offset must lie in [0, N-1], got " +
                                std::to_string(d));
  PartitionedIdft p;
  p.full = f_tilde;
  p.d = d;
  p.top = f_tilde.topRows(n - d);
  p.bottom = f_tilde.bottomRows(d);
  return p;
}

/// Real compressive sampling matrix, M x N, standard-normal entries with
/// columns rescaled to unit norm.
struct MeasurementMatrix {
  RealMat a;

  Eigen::Index rows() const { return a.rows(); }
  Eigen::Index cols() const { return a.cols(); }

  /// First d columns (hit the tail of the previous symbol).
  auto left(int d) const { return a.leftCols(d); }
  /// Last N-d columns (hit the head of the current symbol).
  auto right(int d) const { return a.rightCols(a.cols() - d); }

  Mat complex() const { return a.cast<Complex>(); }
};

inline MeasurementMatrix sample_measurement_matrix(const OfdmConfig& cfg, Rng& rng) {
  MeasurementMatrix mm;
  mm.a.resize(cfg.m, cfg.n_total);
  for (int j = 0; j < cfg.n_total; ++j) {
    for (int i = 0; i < cfg.m; ++i) mm.a(i, j) = rng.normal();
    mm.a.col(j).normalize();
  }
  return mm;
}

/// The two M x N_o dictionary factors at offset d:
///   b1 = A_left(d)  * bottom(F~)   couples z[n] to the previous symbol
///   b2 = A_right(d) * top(F~)      couples z[n] to the current symbol
/// so z[n] = b1 s[n-1] + b2 s[n] + A w[n]. At d = 0, b1 is the zero
/// matrix (empty-factor product).
struct BlockDictionary {
  int d = 0;
  Mat b1;
  Mat b2;
};

inline BlockDictionary dictionary_pair(const MeasurementMatrix& a, const PartitionedIdft& p) {
  if (a.cols() != p.full.rows())
    throw std::invalid_argument("dictionary_pair: measurement matrix and IDFT partition disagree on N");
  BlockDictionary dict;
  dict.d = p.d;
  dict.b1 = a.left(p.d).cast<Complex>() * p.bottom;
  dict.b2 = a.right(p.d).cast<Complex>() * p.top;
  return dict;
}

/// One column of the assembled block dictionary: block column p (the
/// coefficient slot of symbol s[p], p in [0, n_blocks]), subcarrier j.
/// Nonzero in at most two row blocks: b2(:,j) where z[p] sees s[p] and
/// b1(:,j) where z[p+1] sees it.
inline Vec dictionary_column(const BlockDictionary& dict, int n_blocks, int p, int j) {
  const Eigen::Index m = dict.b1.rows();
  if (p < 0 || p > n_blocks) throw std::invalid_argument("dictionary_column: block index out of range");
  if (j < 0 || j >= dict.b1.cols())
    throw std::invalid_argument("dictionary_column: subcarrier index out of range");
  Vec col = Vec::Zero(m * n_blocks);
  if (p >= 1) col.segment((p - 1) * m, m) = dict.b2.col(j);
  if (p <= n_blocks - 1) col.segment(p * m, m) = dict.b1.col(j);
  return col;
}

/// Support restriction of the block dictionary: (M*N_b) x (|S|*(N_b+1)),
/// block-bidiagonal with the S-columns of b1 on the diagonal blocks and
/// of b2 on the superdiagonal blocks. Column groups are ordered by symbol
/// index 0..N_b, each group in ascending support order.
inline Mat restrict_support(const BlockDictionary& dict, const SupportSet& s, int n_blocks) {
  if (s.empty()) throw std::invalid_argument("restrict_support: empty support");
  if (n_blocks < 1) throw std::invalid_argument("restrict_support: n_blocks must be >= 1");
  const Eigen::Index m = dict.b1.rows();
  const int k = s.size();
  for (int j : s.indices)
    if (j < 0 || j >= dict.b1.cols())
      throw std::invalid_argument("restrict_support: support index out of range");
  Mat b1s(m, k), b2s(m, k);
  for (int t = 0; t < k; ++t) {
    b1s.col(t) = dict.b1.col(s.indices[t]);
    b2s.col(t) = dict.b2.col(s.indices[t]);
  }
  Mat bs = Mat::Zero(m * n_blocks, static_cast<Eigen::Index>(k) * (n_blocks + 1));
  for (int r = 0; r < n_blocks; ++r) {
    bs.block(r * m, static_cast<Eigen::Index>(r) * k, m, k) = b1s;
    bs.block(r * m, static_cast<Eigen::Index>(r + 1) * k, m, k) = b2s;
  }
  return bs;
}

/// Fully assembled block dictionary, (M*N_b) x (N_o*(N_b+1)). Dense and
/// mostly zero; meant for small-scale checks, not for recovery paths.
inline Mat assemble_block_dictionary(const BlockDictionary& dict, int n_blocks) {
  const Eigen::Index m = dict.b1.rows();
  const Eigen::Index n_sub = dict.b1.cols();
  Mat bd = Mat::Zero(m * n_blocks, n_sub * (n_blocks + 1));
  for (int r = 0; r < n_blocks; ++r) {
    bd.block(r * m, static_cast<Eigen::Index>(r) * n_sub, m, n_sub) = dict.b1;
    bd.block(r * m, static_cast<Eigen::Index>(r + 1) * n_sub, m, n_sub) = dict.b2;
  }
  return bd;
}

/// Atom used by the joint OMP scoring: column j of [b2; b1], matched
/// against stacked frame pairs [z[n-1]; z[n]].
inline Vec stacked_atom(const BlockDictionary& dict, int j) {
  if (j < 0 || j >= dict.b1.cols())
    throw std::invalid_argument("stacked_atom: subcarrier index out of range");
  const Eigen::Index m = dict.b1.rows();
  Vec v(2 * m);
  v.head(m) = dict.b2.col(j);
  v.tail(m) = dict.b1.col(j);
  return v;
}

}  // namespace ofdmsense
