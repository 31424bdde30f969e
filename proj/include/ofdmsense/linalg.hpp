#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace ofdmsense {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealMat = Eigen::MatrixXd;
using RealVec = Eigen::VectorXd;

/// Relative cutoff under which singular values count as zero:
/// max(rows, cols) * machine epsilon. One definition, shared by the
/// solver paths and the rank/spark oracles.
inline double rank_rel_tol(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

/// Numerical rank by SVD. rel_tol <= 0 selects the shared default cutoff;
/// singular values <= rel_tol * sigma_max count as zero.
template <typename Derived>
int numerical_rank(const Eigen::MatrixBase<Derived>& m, double rel_tol = 0.0) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  if (rel_tol <= 0.0) rel_tol = rank_rel_tol(m.rows(), m.cols());
  Eigen::JacobiSVD<typename Derived::PlainObject> svd(m.derived());
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  double cut = rel_tol * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

/// Orthonormal-row basis of the orthogonal complement of the column space:
/// returns P of shape (rows - rank) x rows with P * m = 0 and P * P^H = I.
/// A matrix with no columns yields the identity.
inline Mat column_space_annihilator(const Mat& m, double rel_tol = 0.0) {
  const Eigen::Index rows = m.rows();
  if (m.cols() == 0) return Mat::Identity(rows, rows);
  if (rel_tol <= 0.0) rel_tol = rank_rel_tol(rows, m.cols());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  int r = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    double cut = rel_tol * sv(0);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++r;
  }
  // rank 0 (zero matrix included): any orthonormal basis works, pin the
  // deterministic one
  if (r == 0) return Mat::Identity(rows, rows);
  return svd.matrixU().rightCols(rows - r).adjoint();
}

/// Squared distance from b to the column space of a. Rank-deficient a is
/// fine: the projection is unique even when the minimizer is not.
inline double projection_residual_sq(const Mat& a, const Vec& b) {
  if (a.cols() == 0) return b.squaredNorm();
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
  Vec x = cod.solve(b);
  return (b - a * x).squaredNorm();
}

struct LsSolution {
  Vec coeffs;
  double residual_sq = 0.0;
  bool full_column_rank = true;
};

/// Least squares via Householder QR, falling back to a complete orthogonal
/// decomposition (minimum-norm solution) when the R diagonal signals
/// degeneracy. The residual is always evaluated against the original system.
inline LsSolution solve_least_squares(const Mat& a, const Vec& b) {
  LsSolution out;
  if (a.cols() == 0) {
    out.coeffs = Vec(0);
    out.residual_sq = b.squaredNorm();
    return out;
  }
  bool degenerate = a.rows() < a.cols();
  if (!degenerate) {
    Eigen::HouseholderQR<Mat> qr(a);
    Mat r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      double dj = std::abs(r(j, j));
      dmax = std::max(dmax, dj);
      dmin = std::min(dmin, dj);
    }
    if (dmin > rank_rel_tol(a.rows(), a.cols()) * dmax) {
      out.coeffs = qr.solve(b);
      out.residual_sq = (b - a * out.coeffs).squaredNorm();
      return out;
    }
    degenerate = true;
  }
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
  out.coeffs = cod.solve(b);
  out.residual_sq = (b - a * out.coeffs).squaredNorm();
  out.full_column_rank = cod.rank() == a.cols() && !degenerate;
  return out;
}

/// Householder QR that grows by appended column blocks, with the
/// transformed right-hand side carried along. After each append the
/// least-squares solution against the fixed rhs is a triangular solve,
/// and the residual norm drops out of the tail of Q^H b for free.
///
/// The reflectors are the Hermitian form H = I - tau v v^H with v(0) = 1,
/// so applying H to later columns and to the rhs is one shared routine.
class IncrementalQr {
 public:
  IncrementalQr(const Vec& rhs, Eigen::Index max_cols)
      : qr_(rhs.size(), max_cols), tau_(RealVec::Zero(max_cols)), qtb_(rhs), cols_(0) {
    if (max_cols > rhs.size())
      throw std::logic_error("IncrementalQr: more columns reserved than rows");
  }

  Eigen::Index rows() const { return qr_.rows(); }
  Eigen::Index cols() const { return cols_; }

  /// Absorbs the columns of block into the factorization. Returns false
  /// if any new diagonal entry of R falls under the shared rank cutoff
  /// relative to the largest diagonal seen so far.
  bool append(const Mat& block) {
    const Eigen::Index m = qr_.rows();
    const Eigen::Index w = block.cols();
    if (cols_ + w > qr_.cols() || block.rows() != m)
      throw std::logic_error("IncrementalQr: append exceeds reserved shape");
    qr_.middleCols(cols_, w) = block;
    for (Eigen::Index j = 0; j < cols_; ++j)
      reflect_cols(j, cols_, w);
    bool healthy = true;
    for (Eigen::Index c = 0; c < w; ++c) {
      const Eigen::Index j = cols_ + c;
      factor_column(j);
      if (c + 1 < w) reflect_cols(j, j + 1, w - c - 1);
      reflect_rhs(j);
      double dj = std::abs(qr_(j, j));
      diag_max_ = std::max(diag_max_, dj);
      if (dj <= rank_rel_tol(m, qr_.cols()) * diag_max_) healthy = false;
    }
    cols_ += w;
    return healthy;
  }

  /// Least-squares coefficients against the rhs fixed at construction.
  Vec solve() const {
    Vec x = qtb_.head(cols_);
    qr_.topLeftCorner(cols_, cols_).triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
  }

  /// Squared LS residual of the current column set, read off Q^H b.
  double residual_sq() const { return qtb_.tail(qr_.rows() - cols_).squaredNorm(); }

 private:
  // Builds the reflector for column j from its subdiagonal part. The
  // sign of the diagonal is chosen against the leading entry so the
  // update never cancels.
  void factor_column(Eigen::Index j) {
    const Eigen::Index len = qr_.rows() - j;
    Complex a0 = qr_(j, j);
    double tail_sq = len > 1 ? qr_.col(j).tail(len - 1).squaredNorm() : 0.0;
    if (tail_sq == 0.0) {
      tau_(j) = 0.0;
      return;
    }
    double norm = std::sqrt(std::norm(a0) + tail_sq);
    Complex phase = a0 == Complex(0, 0) ? Complex(1, 0) : a0 / std::abs(a0);
    Complex beta = -phase * norm;
    Complex denom = a0 - beta;
    qr_.col(j).tail(len - 1) /= denom;
    double vsq = 1.0 + tail_sq / std::norm(denom);
    tau_(j) = 2.0 / vsq;
    qr_(j, j) = beta;
  }

  void reflect_cols(Eigen::Index j, Eigen::Index first_col, Eigen::Index ncols) {
    if (tau_(j) == 0.0) return;
    const Eigen::Index len = qr_.rows() - j;
    Vec v(len);
    v(0) = Complex(1, 0);
    v.tail(len - 1) = qr_.col(j).tail(len - 1);
    auto block = qr_.block(j, first_col, len, ncols);
    Eigen::RowVectorXcd w = v.adjoint() * block;
    block.noalias() -= tau_(j) * v * w;
  }

  void reflect_rhs(Eigen::Index j) {
    if (tau_(j) == 0.0) return;
    const Eigen::Index len = qr_.rows() - j;
    Vec v(len);
    v(0) = Complex(1, 0);
    v.tail(len - 1) = qr_.col(j).tail(len - 1);
    Complex w = v.dot(qtb_.tail(len));
    qtb_.tail(len).noalias() -= tau_(j) * w * v;
  }

  Mat qr_;
  RealVec tau_;
  Vec qtb_;
  Eigen::Index cols_;
  double diag_max_ = 0.0;
};

}  // namespace ofdmsense
