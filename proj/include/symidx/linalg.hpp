#ifndef SYMIDX_LINALG_HPP
#define SYMIDX_LINALG_HPP

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace symidx {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Invalid input: bad parameters, non-closed subalgebras, indefinite forms, ...
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: rank decisions that cannot be made at the working tolerance.
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double closure = 1e-8;    // subalgebra/structure-constant residual bound
  double rank = 1e-9;       // relative singular-value threshold
  double eigen_gap = 1e-6;  // relative eigenvalue clustering gap
};

struct SingularValueInfo {
  double sv_max = 0.0;
  double smallest_kept = 0.0;    // smallest singular value above threshold
  double largest_dropped = 0.0;  // largest singular value treated as zero
};

/// Orthonormal basis of ker(A) as columns. Threshold is relative to the largest
/// singular value.
inline Mat nullspace(const Mat& A, double rel_tol, SingularValueInfo* info = nullptr) {
  const int n = static_cast<int>(A.cols());
  if (A.rows() == 0 || n == 0) {
    if (info) *info = {};
    return Mat::Identity(n, n);
  }
  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double thr = rel_tol * smax;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) ++rank;
  if (info) {
    info->sv_max = smax;
    info->smallest_kept = rank > 0 ? sv(rank - 1) : 0.0;
    info->largest_dropped = rank < sv.size() ? sv(rank) : 0.0;
  }
  return svd.matrixV().rightCols(n - rank);
}

inline int numeric_rank(const Mat& A, double rel_tol) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::BDCSVD<Mat> svd(A);
  const auto& sv = svd.singularValues();
  const double thr = rel_tol * (sv.size() > 0 ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) ++rank;
  return rank;
}

/// Orthonormal basis (columns) of the column space of A.
inline Mat orthonormal_columns(const Mat& A, double rel_tol, SingularValueInfo* info = nullptr) {
  if (A.cols() == 0 || A.rows() == 0) return Mat(A.rows(), 0);
  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double thr = rel_tol * smax;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) ++rank;
  if (info) {
    info->sv_max = smax;
    info->smallest_kept = rank > 0 ? sv(rank - 1) : 0.0;
    info->largest_dropped = rank < sv.size() ? sv(rank) : 0.0;
  }
  return svd.matrixU().leftCols(rank);
}

/// Modified Gram-Schmidt on the rows of V with respect to the inner product
/// gram (SPD). Preserves the input order; throws if a row is dependent.
inline Mat gram_orthonormalize_rows(const Mat& V, const Mat& gram, double dep_tol = 1e-10) {
  Mat out(V.rows(), V.cols());
  for (int i = 0; i < V.rows(); ++i) {
    Vec v = V.row(i).transpose();
    const double n0 = std::sqrt(std::max(0.0, double(v.dot(gram * v))));
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < i; ++j) {
        Vec u = out.row(j).transpose();
        v -= u.dot(gram * v) * u;
      }
    const double n1 = std::sqrt(std::max(0.0, double(v.dot(gram * v))));
    if (n1 <= dep_tol * std::max(1.0, n0))
      throw ValidationError("gram_orthonormalize_rows: row " + std::to_string(i) +
                            " is linearly dependent on the previous rows");
    out.row(i) = (v / n1).transpose();
  }
  return out;
}

/// True when the column spans of two orthonormal bases coincide.
inline bool spans_equal(const Mat& A, const Mat& B, double tol = 1e-8) {
  if (A.cols() != B.cols()) return false;
  if (A.cols() == 0) return true;
  const double r1 = ((Mat::Identity(A.rows(), A.rows()) - A * A.transpose()) * B).cwiseAbs().maxCoeff();
  const double r2 = ((Mat::Identity(B.rows(), B.rows()) - B * B.transpose()) * A).cwiseAbs().maxCoeff();
  return std::max(r1, r2) <= tol;
}

/// True when span(sub) is contained in span(A); both orthonormal columns.
inline bool span_contains(const Mat& A, const Mat& sub, double tol = 1e-8) {
  if (sub.cols() == 0) return true;
  if (A.cols() == 0) return false;
  const double r = ((Mat::Identity(A.rows(), A.rows()) - A * A.transpose()) * sub).cwiseAbs().maxCoeff();
  return r <= tol;
}

/// dim(span(A) ∩ span(B)) for orthonormal column bases.
inline int intersection_dim(const Mat& A, const Mat& B, double rel_tol = 1e-8) {
  if (A.cols() == 0 || B.cols() == 0) return 0;
  Mat joint(A.rows(), A.cols() + B.cols());
  joint << A, B;
  return static_cast<int>(A.cols() + B.cols()) - numeric_rank(joint, rel_tol);
}

inline Mat vec_to_col(const Mat& M) {
  return Eigen::Map<const Mat>(M.data(), M.size(), 1);
}

/// Deterministic RNG for generic-element sampling.
inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

inline Vec random_gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

}  // namespace symidx

#endif
