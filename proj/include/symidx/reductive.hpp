#ifndef SYMIDX_REDUCTIVE_HPP
#define SYMIDX_REDUCTIVE_HPP

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "symidx/lie_algebra.hpp"

namespace symidx {

/// Reductive decomposition g = h + m with m the b-orthogonal complement of h.
/// m_basis rows are b-orthonormal, so b restricted to m is the identity in
/// m-coordinates and isotropy operators are plain skew matrices.
class ReductiveSpace {
 public:
  /// h_gens rows are coefficient vectors spanning a subalgebra. preferred_m,
  /// when given, fixes the order of the m-basis (rows spanning h-orthogonal
  /// directions, e.g. a catalog's named submodules).
  static ReductiveSpace build(LieAlgebraBasis alg, AdInvariantForm form, const Mat& h_gens,
                              std::optional<Mat> preferred_m = {}, double tol = 1e-8) {
    ReductiveSpace S(std::move(alg), std::move(form));
    const int d = S.alg_.dim();
    const Mat& G = S.form_.gram();

    if (h_gens.rows() > 0 && h_gens.cols() != d)
      throw ValidationError("ReductiveSpace: h generators have wrong length");

    // Subalgebra closure check with witness pair.
    Mat h0 = h_gens.rows() > 0 ? gram_orthonormalize_rows(h_gens, G) : Mat(0, d);
    for (int i = 0; i < h_gens.rows(); ++i)
      for (int j = i + 1; j < h_gens.rows(); ++j) {
        Vec br = S.alg_.bracket_coeffs(h_gens.row(i).transpose(), h_gens.row(j).transpose());
        Vec rem = br - h0.transpose() * (h0 * (G * br));
        const double res = std::sqrt(std::max(0.0, rem.dot(G * rem)));
        if (res > tol)
          throw ValidationError("ReductiveSpace: h generators are not closed under the bracket, "
                                "witness pair (" + std::to_string(i) + "," + std::
                                to_string(j) + "), residual " + std::to_string(res));
      }
    S.h_basis_ = h0;

    // b-orthonormal coordinates: y = L^T x with G = L L^T.
    Eigen::LLT<Mat> llt(G);
    if (llt.info() != Eigen::Success)
      throw ValidationError("ReductiveSpace: form Gram matrix is not positive definite");
    Mat L = llt.matrixL();

    if (preferred_m) {
      if (preferred_m->cols() != d)
        throw ValidationError("ReductiveSpace: preferred m vectors have wrong length");
      if (preferred_m->rows() != d - h0.rows())
        throw ValidationError("ReductiveSpace: preferred m vectors do not span the complement");
      for (int i = 0; i < preferred_m->rows(); ++i) {
        Vec v = preferred_m->row(i).transpose();
        const double hcomp = h0.rows() > 0 ? (h0 * (G * v)).cwiseAbs().maxCoeff() : 0.0;
        if (hcomp > tol)
          throw ValidationError("ReductiveSpace: preferred m vector " + std::to_string(i) +
                                " is not b-orthogonal to h");
      }
      S.m_basis_ = gram_orthonormalize_rows(*preferred_m, G);
    } else {
      Mat hy = h0 * L;  // rows orthonormal in y-coordinates
      Mat N = nullspace(hy, 1e-12);
      Mat my = N.transpose();  // rows: y-coordinates of m
      S.m_basis_ = my * L.inverse();
    }

    S.finalize(tol);
    return S;
  }

  /// Convenience: generators given as ambient matrices.
  static ReductiveSpace build_from_matrices(LieAlgebraBasis alg, AdInvariantForm form,
                                            const std::vector<Mat>& h_mats,
                                            const std::vector<Mat>& preferred_m_mats = {},
                                            double tol = 1e-8) {
    Mat hg(h_mats.size(), alg.dim());
    for (size_t i = 0; i < h_mats.size(); ++i) {
      double res = 0.0;
      hg.row(i) = alg.coefficients_of(h_mats[i], &res).transpose();
      if (res > tol)
        throw ValidationError("ReductiveSpace: h matrix " + std::to_string(i) +
                              " is not in the algebra span");
    }
    std::optional<Mat> pm;
    if (!preferred_m_mats.empty()) {
      Mat mm(preferred_m_mats.size(), alg.dim());
      for (size_t i = 0; i < preferred_m_mats.size(); ++i) {
        double res = 0.0;
        mm.row(i) = alg.coefficients_of(preferred_m_mats[i], &res).transpose();
        if (res > tol)
          throw ValidationError("ReductiveSpace: m matrix " + std::to_string(i) +
                                " is not in the algebra span");
      }
      pm = mm;
    }
    return build(std::move(alg), std::move(form), hg, pm, tol);
  }

  const LieAlgebraBasis& algebra() const { return alg_; }
  const AdInvariantForm& form() const { return form_; }
  int dim_g() const { return alg_.dim(); }
  int dim_h() const { return static_cast<int>(h_basis_.rows()); }
  int dim_m() const { return static_cast<int>(m_basis_.rows()); }
  const Mat& h_basis() const { return h_basis_; }
  const Mat& m_basis() const { return m_basis_; }

  /// m-coordinates of the m-projection of a g-coefficient vector.
  Vec to_m(const Vec& x) const { return m_basis_ * (form_.gram() * x); }
  /// h-coordinates of the h-projection.
  Vec to_h(const Vec& x) const { return h_basis_ * (form_.gram() * x); }
  /// g-coefficient vector of an m-coordinate vector.
  Vec from_m(const Vec& c) const { return m_basis_.transpose() * c; }
  Vec from_h(const Vec& c) const { return h_basis_.transpose() * c; }

  Vec bracket_g(const Vec& u, const Vec& v) const { return alg_.bracket_coeffs(u, v); }
  /// [m_a, x] as a g-coefficient vector, for arbitrary x.
  Vec bracket_m_g(int a, const Vec& x) const { return mg_[a] * x; }

  /// ad(h_r) restricted to m, in m-coordinates (skew).
  const std::vector<Mat>& isotropy_operators() const { return iso_ops_; }
  /// m-projected ad(m_c) on m: column a holds the m-coordinates of [m_c, m_a].
  const Mat& ad_m(int c) const { return ad_m_[c]; }

  double reductivity_residual() const { return reductivity_residual_; }

 private:
  ReductiveSpace(LieAlgebraBasis alg, AdInvariantForm form)
      : alg_(std::move(alg)), form_(std::move(form)) {}

  void finalize(double tol) {
    const int d = alg_.dim(), dh = dim_h(), dm = dim_m();
    if (dh + dm != d)
      throw ValidationError("ReductiveSpace: dim h + dim m != dim g");
    const Mat& G = form_.gram();

    mg_.resize(dm);
    for (int a = 0; a < dm; ++a) {
      Mat Ma(d, d);
      Vec ma = m_basis_.row(a).transpose();
      for (int k = 0; k < d; ++k) Ma.row(k) = (alg_.structure(k).transpose() * ma).transpose();
      mg_[a] = std::move(Ma);
    }

    iso_ops_.resize(dh);
    reductivity_residual_ = 0.0;
    for (int r = 0; r < dh; ++r) {
      Mat op(dm, dm);
      Vec hr = h_basis_.row(r).transpose();
      for (int a = 0; a < dm; ++a) {
        Vec br = alg_.bracket_coeffs(hr, m_basis_.row(a).transpose());
        op.col(a) = m_basis_ * (G * br);
        if (dh > 0) {
          const double hres = (h_basis_ * (G * br)).cwiseAbs().maxCoeff();
          reductivity_residual_ = std::max(reductivity_residual_, hres);
        }
      }
      iso_ops_[r] = std::move(op);
    }
    if (reductivity_residual_ > tol)
      throw ValidationError("ReductiveSpace: [h,m] leaves m (residual " +
                            std::to_string(reductivity_residual_) + ")");

    ad_m_.resize(dm);
    for (int c = 0; c < dm; ++c) {
      Mat B(dm, dm);
      Vec mc = m_basis_.row(c).transpose();
      for (int a = 0; a < dm; ++a) B.col(a) = m_basis_ * (G * (mg_[c] * m_basis_.row(a).transpose()));
      ad_m_[c] = std::move(B);
    }
  }

  LieAlgebraBasis alg_;
  AdInvariantForm form_;
  Mat h_basis_;
  Mat m_basis_;
  std::vector<Mat> mg_;
  std::vector<Mat> iso_ops_;
  std::vector<Mat> ad_m_;
  double reductivity_residual_ = 0.0;
};

using SpacePtr = std::shared_ptr<const ReductiveSpace>;

namespace detail {

/// Basis of {S : [S, op] = 0 for all ops}, S symmetric when sym is set.
/// Operators act on a k-dimensional space.
inline std::vector<Mat> commutant_basis(const std::vector<Mat>& ops, int k, bool sym,
                                        double rank_tol) {
  std::vector<std::pair<int, int>> unknowns;
  if (sym) {
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) unknowns.push_back({a, b});
  } else {
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) unknowns.push_back({a, b});
  }
  const int nu = static_cast<int>(unknowns.size());
  if (ops.empty()) {
    // no constraints: whole space
    std::vector<Mat> out;
    for (auto [a, b] : unknowns) {
      Mat S = Mat::Zero(k, k);
      S(a, b) = 1.0;
      if (sym) S(b, a) = 1.0;
      out.push_back(S);
    }
    return out;
  }
  Mat K(static_cast<int>(ops.size()) * k * k, nu);
  for (int u = 0; u < nu; ++u) {
    auto [a, b] = unknowns[u];
    Mat S = Mat::Zero(k, k);
    S(a, b) = 1.0;
    if (sym) S(b, a) = 1.0;
    int row = 0;
    for (const Mat& rho : ops) {
      Mat C = S * rho - rho * S;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) K(row++, u) = C(i, j);
    }
  }
  Mat null = nullspace(K, rank_tol);
  std::vector<Mat> out;
  for (int c = 0; c < null.cols(); ++c) {
    Mat S = Mat::Zero(k, k);
    for (int u = 0; u < nu; ++u) {
      auto [a, b] = unknowns[u];
      S(a, b) += null(u, c);
      if (sym && a != b) S(b, a) += null(u, c);
    }
    out.push_back(S);
  }
  return out;
}

inline std::vector<Mat> restrict_ops(const std::vector<Mat>& ops, const Mat& P) {
  std::vector<Mat> out;
  out.reserve(ops.size());
  for (const Mat& op : ops) out.push_back(P.transpose() * op * P);
  return out;
}

inline void canonicalize_sign(Mat& block) {
  if (block.cols() == 0) return;
  for (int c = 0; c < block.cols(); ++c) {
    for (int r = 0; r < block.rows(); ++r) {
      if (std::abs(block(r, c)) > 1e-9) {
        if (block(r, c) < 0) block.col(c) *= -1.0;
        break;
      }
    }
  }
}

}  // namespace detail

/// Splitting of m under the connected isotropy group: the fixed subspace m0
/// plus irreducible modules with Schur types and equivalence classes.
/// All bases are orthonormal columns in m-coordinates.
struct IsotropyDecomposition {
  Mat fixed;
  std::vector<Mat> modules;
  std::vector<int> schur_types;  // 1 = real, 2 = complex, 4 = quaternionic
  std::vector<std::vector<int>> equivalence_classes;
  double max_invariance_residual = 0.0;

  int dim_fixed() const { return static_cast<int>(fixed.cols()); }
  int module_dim(int i) const { return static_cast<int>(modules[i].cols()); }
  /// Orthonormal span of all modules in one equivalence class.
  Mat class_span(const std::vector<int>& cls) const {
    int total = 0;
    for (int i : cls) total += module_dim(i);
    Mat out(fixed.rows(), total);
    int at = 0;
    for (int i : cls) {
      out.middleCols(at, module_dim(i)) = modules[i];
      at += module_dim(i);
    }
    return out;
  }
};

namespace detail {

inline int schur_type_of(const std::vector<Mat>& ops_restricted, int k, double rank_tol) {
  const auto comm = commutant_basis(ops_restricted, k, /*sym=*/false, rank_tol);
  return static_cast<int>(comm.size());
}

inline bool modules_equivalent(const std::vector<Mat>& ops, const Mat& Pi, const Mat& Pj,
                               double rank_tol) {
  const int k = static_cast<int>(Pi.cols());
  if (k != Pj.cols()) return false;
  // T with T (P_i^T rho P_i) = (P_j^T rho P_j) T for all rho
  Mat K(static_cast<int>(ops.size()) * k * k, k * k);
  int col = 0;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      Mat T = Mat::Zero(k, k);
      T(a, b) = 1.0;
      int row = 0;
      for (const Mat& rho : ops) {
        Mat ri = Pi.transpose() * rho * Pi;
        Mat rj = Pj.transpose() * rho * Pj;
        Mat C = T * ri - rj * T;
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) K(row++, col) = C(i, j);
      }
      ++col;
    }
  return nullspace(K, rank_tol).cols() > 0;
}

inline void finish_decomposition(IsotropyDecomposition& dec, const std::vector<Mat>& ops,
                                 const Tolerances& tol) {
  const int n = static_cast<int>(dec.modules.size());
  // invariance residuals
  dec.max_invariance_residual = 0.0;
  const int dm = static_cast<int>(dec.fixed.rows());
  auto invariance = [&](const Mat& P) {
    double r = 0.0;
    for (const Mat& rho : ops) {
      Mat off = (Mat::Identity(dm, dm) - P * P.transpose()) * (rho * P);
      if (off.size() > 0) r = std::max(r, off.cwiseAbs().maxCoeff());
    }
    return r;
  };
  if (dec.fixed.cols() > 0) {
    for (const Mat& rho : ops) {
      Mat img = rho * dec.fixed;
      if (img.size() > 0)
        dec.max_invariance_residual = std::max(dec.max_invariance_residual,
                                               img.cwiseAbs().maxCoeff());
    }
  }
  for (const Mat& P : dec.modules)
    dec.max_invariance_residual = std::max(dec.max_invariance_residual, invariance(P));

  dec.schur_types.resize(n);
  for (int i = 0; i < n; ++i) {
    const int type = schur_type_of(detail::restrict_ops(ops, dec.modules[i]),
                                   static_cast<int>(dec.modules[i].cols()), tol.rank);
    if (type != 1 && type != 2 && type != 4)
      throw DegeneracyError("decompose_isotropy: intertwiner algebra of module " +
                            std::to_string(i) + " has dimension " + std::to_string(type) +
                            "; block is not irreducible at this tolerance "
                            "(try a smaller rank tolerance)");
    dec.schur_types[i] = type;
  }

  // equivalence classes via nonzero intertwiner spaces
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dec.modules[i].cols() == dec.modules[j].cols() &&
          modules_equivalent(ops, dec.modules[i], dec.modules[j], tol.rank))
        parent[find(i)] = find(j);
  std::vector<std::vector<int>> classes;
  for (int root = 0; root < n; ++root) {
    std::vector<int> cls;
    for (int i = 0; i < n; ++i)
      if (find(i) == root) cls.push_back(i);
    if (!cls.empty()) classes.push_back(cls);
  }
  std::sort(classes.begin(), classes.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  dec.equivalence_classes = std::move(classes);
}

}  // namespace detail

/// Splits m into the isotropy-fixed subspace and irreducible modules using
/// eigenspaces of generic symmetric commutant elements, refined until every
/// block has a one-dimensional symmetric intertwiner algebra.
inline IsotropyDecomposition decompose_isotropy(const ReductiveSpace& S,
                                                const Tolerances& tol = {},
                                                uint64_t seed = 0x51ef9a1ull) {
  const int dm = S.dim_m();
  const auto& ops = S.isotropy_operators();
  IsotropyDecomposition dec;

  if (ops.empty()) {
    dec.fixed = Mat::Identity(dm, dm);
    detail::finish_decomposition(dec, ops, tol);
    return dec;
  }

  Mat stacked(static_cast<int>(ops.size()) * dm, dm);
  for (size_t r = 0; r < ops.size(); ++r) stacked.middleRows(static_cast<int>(r) * dm, dm) = ops[r];
  dec.fixed = nullspace(stacked, tol.rank);

  Mat rest = nullspace(dec.fixed.transpose(), tol.rank);
  auto rng = make_rng(seed);

  std::vector<Mat> queue;
  if (rest.cols() > 0) queue.push_back(rest);
  while (!queue.empty()) {
    Mat P = queue.back();
    queue.pop_back();
    const int k = static_cast<int>(P.cols());
    auto opsP = detail::restrict_ops(ops, P);
    auto comm = detail::commutant_basis(opsP, k, /*sym=*/true, tol.rank);
    if (comm.empty())
      throw DegeneracyError("decompose_isotropy: commutant construction is rank-deficient "
                            "beyond tolerance; try a smaller rank tolerance");
    if (comm.size() == 1) {
      Mat M = P;
      detail::canonicalize_sign(M);
      dec.modules.push_back(M);
      continue;
    }
    bool split = false;
    for (int attempt = 0; attempt < 8 && !split; ++attempt) {
      Mat Smat = Mat::Zero(k, k);
      Vec g = random_gaussian(rng, static_cast<int>(comm.size()));
      for (size_t c = 0; c < comm.size(); ++c) Smat += g(static_cast<int>(c)) * comm[c] / comm[c].norm();
      Eigen::SelfAdjointEigenSolver<Mat> eig(Smat);
      const Vec ev = eig.eigenvalues();
      const double spread = ev(k - 1) - ev(0);
      const double thr = tol.eigen_gap * std::max(1.0, spread);
      std::vector<std::pair<int, int>> clusters;  // [begin, end)
      int begin = 0;
      for (int i = 1; i <= k; ++i)
        if (i == k || ev(i) - ev(i - 1) > thr) {
          clusters.push_back({begin, i});
          begin = i;
        }
      if (clusters.size() < 2) continue;
      for (auto [b, e] : clusters) queue.push_back(P * eig.eigenvectors().middleCols(b, e - b));
      split = true;
    }
    if (!split)
      throw DegeneracyError("decompose_isotropy: generic commutant element failed to split a "
                            "reducible block; eigenvalue clustering gap too coarse");
  }

  std::sort(dec.modules.begin(), dec.modules.end(), [](const Mat& a, const Mat& b) {
    if (a.cols() != b.cols()) return a.cols() < b.cols();
    for (int r = 0; r < a.rows(); ++r) {
      const double d = a(r, 0) - b(r, 0);
      if (std::abs(d) > 1e-9) return d < 0;
    }
    return false;
  });

  detail::finish_decomposition(dec, ops, tol);
  if (dec.max_invariance_residual > 1e-8)
    throw DegeneracyError("decompose_isotropy: module invariance residual " +
                          std::to_string(dec.max_invariance_residual) + " exceeds 1e-8");
  return dec;
}

/// Decomposition from explicitly named parts (validated, order preserved).
inline IsotropyDecomposition decomposition_from_parts(const ReductiveSpace& S, Mat fixed,
                                                      std::vector<Mat> modules,
                                                      const Tolerances& tol = {}) {
  const int dm = S.dim_m();
  int total = static_cast<int>(fixed.cols());
  for (const Mat& M : modules) total += static_cast<int>(M.cols());
  if (total != dm)
    throw ValidationError("decomposition_from_parts: part dimensions do not sum to dim m");

  std::vector<Mat> all;
  if (fixed.cols() > 0) all.push_back(fixed);
  for (const Mat& M : modules) all.push_back(M);
  for (size_t i = 0; i < all.size(); ++i)
    for (size_t j = i + 1; j < all.size(); ++j)
      if ((all[i].transpose() * all[j]).cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("decomposition_from_parts: parts are not b-orthogonal");

  IsotropyDecomposition dec;
  dec.fixed = std::move(fixed);
  dec.modules = std::move(modules);
  detail::finish_decomposition(dec, S.isotropy_operators(), tol);
  if (dec.max_invariance_residual > 1e-8)
    throw ValidationError("decomposition_from_parts: a part is not isotropy-invariant (residual " +
                          std::to_string(dec.max_invariance_residual) + ")");
  // the declared fixed part must actually be fixed
  for (const Mat& rho : S.isotropy_operators())
    if (dec.fixed.cols() > 0 && (rho * dec.fixed).cwiseAbs().maxCoeff() > 1e-8)
      throw ValidationError("decomposition_from_parts: declared fixed part is not fixed");
  return dec;
}

}  // namespace symidx

#endif
