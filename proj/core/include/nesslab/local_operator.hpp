#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "nesslab/chain.hpp"
#include "nesslab/types.hpp"

namespace nesslab {

/// Kronecker product of per-site factors with the first factor varying
/// fastest in the composite index.
Matrix tensor_sites(const std::vector<Matrix>& factors);

/// An operator supported on a finite, strictly increasing list of lattice
/// sites. Site labels are plain integers; they are lattice coordinates until
/// an operator is placed on a chain, where they must lie in [0, n_sites).
class LocalOperator {
 public:
  LocalOperator() = default;
  LocalOperator(std::vector<int> support, Matrix coeffs, int site_dim);

  /// Constructs and verifies Hermiticity to `tol`; the flag is kept.
  static LocalOperator hermitian(std::vector<int> support, Matrix coeffs, int site_dim,
                                 double tol = 1e-12);
  static LocalOperator scalar(cd value, int site_dim);
  static LocalOperator identity(std::vector<int> support, int site_dim);
  static LocalOperator zero(int site_dim) { return scalar(0.0, site_dim); }
  static LocalOperator on_site(int site, const Matrix& m);
  /// Product of single-site factors at distinct sites, in any order.
  static LocalOperator product(std::vector<std::pair<int, Matrix>> factors);

  const std::vector<int>& support() const { return support_; }
  const Matrix& coeffs() const { return coeffs_; }
  int site_dim() const { return site_dim_; }
  Eigen::Index dim() const { return coeffs_.rows(); }
  bool hermitian_flag() const { return hermitian_flag_; }

  bool is_hermitian(double tol = 1e-12) const;
  double norm() const;
  double max_abs() const;
  LocalOperator adjoint() const;

  /// Smallest and largest support site; the support must be non-empty.
  int min_site() const;
  int max_site() const;

 private:
  std::vector<int> support_;
  Matrix coeffs_ = Matrix::Zero(1, 1);
  int site_dim_ = 2;
  bool hermitian_flag_ = false;
};

std::vector<int> support_union(const std::vector<int>& a, const std::vector<int>& b);
std::vector<int> site_range(int first, int last);

/// Tensor with the identity on the sites of `support` not already covered.
LocalOperator extend_to(const LocalOperator& op, const std::vector<int>& support);

LocalOperator operator+(const LocalOperator& a, const LocalOperator& b);
LocalOperator operator-(const LocalOperator& a, const LocalOperator& b);
LocalOperator operator-(const LocalOperator& a);
LocalOperator operator*(cd s, const LocalOperator& a);
LocalOperator operator*(const LocalOperator& a, const LocalOperator& b);
LocalOperator& operator+=(LocalOperator& a, const LocalOperator& b);

LocalOperator commutator(const LocalOperator& a, const LocalOperator& b);

/// Largest entrywise difference after extending both to the common support.
double max_abs_diff(const LocalOperator& a, const LocalOperator& b);

/// Trace over one site of the support.
LocalOperator partial_trace(const LocalOperator& op, int site);

/// Drops every site on which the operator acts as the identity (entrywise
/// tolerance relative to max(1, max|coeff|)).
LocalOperator reduce_support(const LocalOperator& op, double tol = 1e-12);

/// Moves site s to f(s) and re-sorts the tensor factors. `f` must be
/// injective on the support.
LocalOperator relabel(const LocalOperator& op, const std::function<int(int)>& f);

/// Lattice translation on Z (no wrap).
LocalOperator shift(const LocalOperator& op, int x);

/// Translation by x on the chain: modulo n_sites on periodic chains,
/// range-checked on open chains.
LocalOperator translate(const LocalOperator& op, int x, const ChainConfig& chain);

/// Matrix units E(i,j) of one site and the product-basis decomposition used
/// for Lieb-Robinson estimates.
class MatrixUnitBasis {
 public:
  explicit MatrixUnitBasis(int site_dim);

  int site_dim() const { return site_dim_; }
  Matrix unit(int i, int j) const;

  struct Term {
    std::vector<int> rows;  // i_x per support site
    std::vector<int> cols;  // j_x per support site
    cd coeff;
  };

  /// Coefficients C({i_x},{j_x}) of op in the basis of products of matrix
  /// units; entries with |C| <= drop_tol are skipped.
  std::vector<Term> decompose(const LocalOperator& op, double drop_tol = 0.0) const;

  /// Sums coeff * prod_x E(i_x, j_x) using explicit tensor products.
  LocalOperator reconstruct(const std::vector<Term>& terms, const std::vector<int>& support) const;

 private:
  int site_dim_;
};

}  // namespace nesslab
