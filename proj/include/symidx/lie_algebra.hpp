#ifndef SYMIDX_LIE_ALGEBRA_HPP
#define SYMIDX_LIE_ALGEBRA_HPP

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "symidx/linalg.hpp"

namespace symidx {

/// Matrix commutator AB - BA.
inline Mat bracket(const Mat& A, const Mat& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols() || A.rows() != A.cols())
    throw ValidationError("bracket: ambient dimension mismatch");
  return A * B - B * A;
}

namespace detail {

/// Real 2x2 block of the complex scalar a + bi.
inline void put_complex(Mat& M, int p, int q, double a, double b) {
  M(2 * p, 2 * q) = a;
  M(2 * p, 2 * q + 1) = -b;
  M(2 * p + 1, 2 * q) = b;
  M(2 * p + 1, 2 * q + 1) = a;
}

/// Real 4x4 block of left multiplication by the quaternion a + bi + cj + dk.
inline void put_quaternion(Mat& M, int p, int q, double a, double b, double c, double d) {
  const double L[4][4] = {{a, -b, -c, -d}, {b, a, -d, c}, {c, d, a, -b}, {d, -c, b, a}};
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s) M(4 * p + r, 4 * q + s) = L[r][s];
}

}  // namespace detail

/// Ordered basis of a compact matrix Lie algebra together with its structure
/// constants c[i][j][k], defined by [X_i, X_j] = sum_k c[i][j][k] X_k.
class LieAlgebraBasis {
 public:
  /// so_n as real skew matrices E_{ij} (i < j); su_n and sp_n through the
  /// standard real realizations of complex (2n x 2n) and quaternionic
  /// (4n x 4n) anti-Hermitian matrices.
  static LieAlgebraBasis standard(const std::string& family, int n) {
    if (family == "so") {
      if (n < 3) throw ValidationError("standard: so_n needs n >= 3 to be nonabelian");
      std::vector<Mat> basis;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          Mat E = Mat::Zero(n, n);
          E(i, j) = 1.0;
          E(j, i) = -1.0;
          basis.push_back(E);
        }
      return LieAlgebraBasis(std::move(basis), "so");
    }
    if (family == "su") {
      if (n < 2) throw ValidationError("standard: su_n needs n >= 2 to be nonabelian");
      std::vector<Mat> basis;
      for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) {
          Mat A = Mat::Zero(2 * n, 2 * n);  // entry 1 at (p,q), -1 at (q,p)
          detail::put_complex(A, p, q, 1.0, 0.0);
          detail::put_complex(A, q, p, -1.0, 0.0);
          basis.push_back(A);
          Mat B = Mat::Zero(2 * n, 2 * n);  // entry i at (p,q) and (q,p)
          detail::put_complex(B, p, q, 0.0, 1.0);
          detail::put_complex(B, q, p, 0.0, 1.0);
          basis.push_back(B);
        }
      for (int r = 0; r + 1 < n; ++r) {  // i (E_rr - E_{r+1,r+1})
        Mat D = Mat::Zero(2 * n, 2 * n);
        detail::put_complex(D, r, r, 0.0, 1.0);
        detail::put_complex(D, r + 1, r + 1, 0.0, -1.0);
        basis.push_back(D);
      }
      return LieAlgebraBasis(std::move(basis), "su");
    }
    if (family == "sp") {
      if (n < 1) throw ValidationError("standard: sp_n needs n >= 1");
      std::vector<Mat> basis;
      const double U[4][4] = {  // 1, i, j, k coordinates
          {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
      for (int s = 0; s < n; ++s)
        for (int u = 1; u < 4; ++u) {  // imaginary diagonal entries
          Mat D = Mat::Zero(4 * n, 4 * n);
          detail::put_quaternion(D, s, s, U[u][0], U[u][1], U[u][2], U[u][3]);
          basis.push_back(D);
        }
      for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q)
          for (int u = 0; u < 4; ++u) {  // x_pq = u, x_qp = -conj(u)
            Mat O = Mat::Zero(4 * n, 4 * n);
            detail::put_quaternion(O, p, q, U[u][0], U[u][1], U[u][2], U[u][3]);
            const double sgn = (u == 0) ? -1.0 : 1.0;
            detail::put_quaternion(O, q, p, sgn * U[u][0], sgn * U[u][1], sgn * U[u][2],
                                   sgn * U[u][3]);
            basis.push_back(O);
          }
      return LieAlgebraBasis(std::move(basis), "sp");
    }
    throw ValidationError("standard: unknown family '" + family + "' (expected so|su|sp)");
  }

  static LieAlgebraBasis from_matrices(std::vector<Mat> basis, std::string name = "custom",
                                       double closure_tol = 1e-8) {
    return LieAlgebraBasis(std::move(basis), std::move(name), closure_tol);
  }

  int dim() const { return static_cast<int>(basis_.size()); }
  int ambient() const { return ambient_; }
  const std::string& family() const { return family_; }
  const std::vector<Mat>& matrices() const { return basis_; }
  const Mat& element(int i) const { return basis_[i]; }

  /// Realizes a coefficient vector as an ambient matrix.
  Mat realize(const Vec& c) const {
    Mat M = Mat::Zero(ambient_, ambient_);
    for (int i = 0; i < dim(); ++i) M += c(i) * basis_[i];
    return M;
  }

  /// Structure tensor slice: structure(k)(i,j) = c[i][j][k].
  const Mat& structure(int k) const { return structure_[k]; }

  /// Bracket of two coefficient vectors through the structure constants.
  Vec bracket_coeffs(const Vec& u, const Vec& v) const {
    Vec w(dim());
    for (int k = 0; k < dim(); ++k) w(k) = u.dot(structure_[k] * v);
    return w;
  }

  /// Coefficients of M in this basis (Frobenius least squares); residual is
  /// the max-norm of the part of M outside the span.
  Vec coefficients_of(const Mat& M, double* residual = nullptr) const {
    Vec rhs(dim());
    for (int i = 0; i < dim(); ++i) rhs(i) = (basis_[i].transpose().cwiseProduct(M)).sum();
    Vec c = frob_solver_.solve(rhs);
    if (residual) *residual = (M - realize(c)).cwiseAbs().maxCoeff();
    return c;
  }

  double closure_residual() const { return closure_residual_; }
  double jacobi_residual() const { return jacobi_residual_; }

 private:
  LieAlgebraBasis(std::vector<Mat> basis, std::string family, double closure_tol = 1e-8)
      : family_(std::move(family)), basis_(std::move(basis)) {
    if (basis_.empty()) throw ValidationError("LieAlgebraBasis: empty basis");
    ambient_ = static_cast<int>(basis_[0].rows());
    for (size_t i = 0; i < basis_.size(); ++i) {
      const Mat& X = basis_[i];
      if (X.rows() != ambient_ || X.cols() != ambient_)
        throw ValidationError("LieAlgebraBasis: element " + std::to_string(i) +
                              " has mismatched ambient size");
      if (!X.allFinite())
        throw ValidationError("LieAlgebraBasis: element " + std::to_string(i) +
                              " has non-finite entries");
      if ((X + X.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("LieAlgebraBasis: element " + std::to_string(i) +
                              " is not skew-symmetric");
    }
    const int d = dim();
    Mat frob(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        frob(i, j) = frob(j, i) = (basis_[i].transpose().cwiseProduct(basis_[j])).sum();
    frob_solver_.compute(frob);
    if (frob_solver_.info() != Eigen::Success || !frob_solver_.isInvertible())
      throw ValidationError("LieAlgebraBasis: basis elements are linearly dependent");

    structure_.assign(d, Mat::Zero(d, d));
    closure_residual_ = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        double res = 0.0;
        Vec c = coefficients_of(bracket(basis_[i], basis_[j]), &res);
        closure_residual_ = std::max(closure_residual_, res);
        if (res > closure_tol)
          throw ValidationError("LieAlgebraBasis: bracket of elements (" + std::to_string(i) +
                                "," + std::to_string(j) + ") leaves the span (residual " +
                                std::to_string(res) + ")");
        for (int k = 0; k < d; ++k) {
          structure_[k](i, j) = c(k);
          structure_[k](j, i) = -c(k);
        }
      }

    // Jacobi identity on the structure constants.
    jacobi_residual_ = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        Vec cij(d);
        for (int k = 0; k < d; ++k) cij(k) = structure_[k](i, j);
        for (int k = j + 1; k < d; ++k) {
          Vec cjk(d), cki(d);
          for (int l = 0; l < d; ++l) {
            cjk(l) = structure_[l](j, k);
            cki(l) = structure_[l](k, i);
          }
          Vec total = Vec::Zero(d);
          for (int l = 0; l < d; ++l) {
            if (cij(l) != 0.0) total += cij(l) * column(structure_, l, k);
            if (cjk(l) != 0.0) total += cjk(l) * column(structure_, l, i);
            if (cki(l) != 0.0) total += cki(l) * column(structure_, l, j);
          }
          jacobi_residual_ = std::max(jacobi_residual_, total.cwiseAbs().maxCoeff());
        }
      }
    if (jacobi_residual_ > closure_tol)
      throw ValidationError("LieAlgebraBasis: Jacobi identity fails (residual " +
                            std::to_string(jacobi_residual_) + ")");
  }

  // c[l][k][.] as a vector over the last index.
  static Vec column(const std::vector<Mat>& structure, int l, int k) {
    const int d = static_cast<int>(structure.size());
    Vec v(d);
    for (int m = 0; m < d; ++m) v(m) = structure[m](l, k);
    return v;
  }

  std::string family_;
  int ambient_ = 0;
  std::vector<Mat> basis_;
  std::vector<Mat> structure_;
  Eigen::FullPivLU<Mat> frob_solver_;
  double closure_residual_ = 0.0;
  double jacobi_residual_ = 0.0;
};

/// Ad-invariant inner product b(X,Y) = -c tr(XY) on a compact real realization.
class AdInvariantForm {
 public:
  /// Family conventions: so_n carries -1/2 tr(XY); su_n carries -1/2 tr_C(XY)
  /// = -1/4 tr(XY) on the real realization; sp_n carries -1/2 Re tr_H(XY)
  /// = -1/8 tr(XY) on the real realization.
  static double standard_normalization(const std::string& family) {
    if (family == "so") return 0.5;
    if (family == "su") return 0.25;
    if (family == "sp") return 0.125;
    return 0.5;
  }

  static AdInvariantForm trace_form(const LieAlgebraBasis& alg,
                                    std::optional<double> normalization = {},
                                    double tol = 1e-8) {
    const double c = normalization.value_or(standard_normalization(alg.family()));
    const int d = alg.dim();
    Mat gram(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        gram(i, j) = gram(j, i) = -c * (alg.element(i) * alg.element(j)).trace();

    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success)
      throw ValidationError(
          "AdInvariantForm: Gram matrix is not positive definite "
          "(wrong normalization sign or non-compact realization)");

    // Ad-invariance b([Z,X],Y) + b(X,[Z,Y]) = 0 on basis triples.
    double res = 0.0;
    for (int i = 0; i < d; ++i) {
      Mat adGram = Mat::Zero(d, d);  // rows j: b([X_i, X_j], .)
      for (int j = 0; j < d; ++j) {
        Vec cij(d);
        for (int k = 0; k < d; ++k) cij(k) = alg.structure(k)(i, j);
        adGram.row(j) = (gram * cij).transpose();
      }
      res = std::max(res, (adGram + adGram.transpose()).cwiseAbs().maxCoeff());
    }
    if (res > tol)
      throw ValidationError("AdInvariantForm: trace form is not Ad-invariant (residual " +
                            std::to_string(res) + ")");
    return AdInvariantForm(std::move(gram), c, res);
  }

  const Mat& gram() const { return gram_; }
  double normalization() const { return normalization_; }
  double invariance_residual() const { return invariance_residual_; }
  double b(const Vec& u, const Vec& v) const { return u.dot(gram_ * v); }

 private:
  AdInvariantForm(Mat gram, double c, double res)
      : gram_(std::move(gram)), normalization_(c), invariance_residual_(res) {}
  Mat gram_;
  double normalization_;
  double invariance_residual_;
};

}  // namespace symidx

#endif
