#include "nesslab/local_operator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace nesslab {

namespace {

bool strictly_increasing(const std::vector<int>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](int a, int b) { return a >= b; }) == v.end();
}

Eigen::Index pow_index(int d, std::size_t k) {
  Eigen::Index r = 1;
  for (std::size_t i = 0; i < k; ++i) r *= d;
  return r;
}

// offsets[a] = sum_k digit_k(a) * d^pos[k] for a in [0, d^pos.size())
std::vector<Eigen::Index> digit_offsets(int d, const std::vector<std::size_t>& pos) {
  std::vector<Eigen::Index> stride(pos.size());
  for (std::size_t k = 0; k < pos.size(); ++k) stride[k] = pow_index(d, pos[k]);
  const Eigen::Index count = pow_index(d, pos.size());
  std::vector<Eigen::Index> out(static_cast<std::size_t>(count));
  for (Eigen::Index a = 0; a < count; ++a) {
    Eigen::Index rest = a, off = 0;
    for (std::size_t k = 0; k < pos.size(); ++k) {
      off += (rest % d) * stride[k];
      rest /= d;
    }
    out[static_cast<std::size_t>(a)] = off;
  }
  return out;
}

void require_same_dim(const LocalOperator& a, const LocalOperator& b) {
  if (a.site_dim() != b.site_dim()) throw PreconditionError("local operators with different site dimensions");
}

}  // namespace

Matrix tensor_sites(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const Matrix& f : factors) {
    Matrix next(out.rows() * f.rows(), out.cols() * f.cols());
    // new index = old + dim_old * digit(f)
    for (Eigen::Index fj = 0; fj < f.cols(); ++fj)
      for (Eigen::Index fi = 0; fi < f.rows(); ++fi)
        next.block(fi * out.rows(), fj * out.cols(), out.rows(), out.cols()) = f(fi, fj) * out;
    out = std::move(next);
  }
  return out;
}

LocalOperator::LocalOperator(std::vector<int> support, Matrix coeffs, int site_dim)
    : support_(std::move(support)), coeffs_(std::move(coeffs)), site_dim_(site_dim) {
  if (site_dim_ < 2) throw PreconditionError("site dimension must be at least 2");
  if (!strictly_increasing(support_)) throw PreconditionError("support must be strictly increasing");
  const Eigen::Index dim = pow_index(site_dim_, support_.size());
  if (coeffs_.rows() != dim || coeffs_.cols() != dim)
    throw PreconditionError("coefficient matrix does not match support size");
}

LocalOperator LocalOperator::hermitian(std::vector<int> support, Matrix coeffs, int site_dim, double tol) {
  LocalOperator op(std::move(support), std::move(coeffs), site_dim);
  if (!op.is_hermitian(tol)) throw PreconditionError("operator flagged Hermitian is not Hermitian");
  op.hermitian_flag_ = true;
  return op;
}

LocalOperator LocalOperator::scalar(cd value, int site_dim) {
  Matrix m(1, 1);
  m(0, 0) = value;
  return LocalOperator({}, m, site_dim);
}

LocalOperator LocalOperator::identity(std::vector<int> support, int site_dim) {
  const Eigen::Index dim = pow_index(site_dim, support.size());
  return LocalOperator(std::move(support), Matrix::Identity(dim, dim), site_dim);
}

LocalOperator LocalOperator::on_site(int site, const Matrix& m) {
  return LocalOperator({site}, m, static_cast<int>(m.rows()));
}

LocalOperator LocalOperator::product(std::vector<std::pair<int, Matrix>> factors) {
  if (factors.empty()) throw PreconditionError("empty product");
  std::sort(factors.begin(), factors.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<int> support;
  std::vector<Matrix> mats;
  const int d = static_cast<int>(factors.front().second.rows());
  for (auto& [site, m] : factors) {
    if (m.rows() != d || m.cols() != d) throw PreconditionError("product factors must be d x d");
    support.push_back(site);
    mats.push_back(std::move(m));
  }
  return LocalOperator(std::move(support), tensor_sites(mats), d);
}

bool LocalOperator::is_hermitian(double tol) const {
  return (coeffs_ - coeffs_.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, max_abs());
}

double LocalOperator::max_abs() const { return coeffs_.cwiseAbs().maxCoeff(); }

double LocalOperator::norm() const {
  if (hermitian_flag_ || is_hermitian(1e-14)) {
    Matrix h = 0.5 * (coeffs_ + coeffs_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<Matrix> svd(coeffs_);
  return svd.singularValues()(0);
}

LocalOperator LocalOperator::adjoint() const {
  LocalOperator out(support_, coeffs_.adjoint(), site_dim_);
  out.hermitian_flag_ = hermitian_flag_;
  return out;
}

int LocalOperator::min_site() const {
  if (support_.empty()) throw PreconditionError("scalar operator has no sites");
  return support_.front();
}

int LocalOperator::max_site() const {
  if (support_.empty()) throw PreconditionError("scalar operator has no sites");
  return support_.back();
}

std::vector<int> support_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> site_range(int first, int last) {
  std::vector<int> out;
  for (int s = first; s <= last; ++s) out.push_back(s);
  return out;
}

LocalOperator extend_to(const LocalOperator& op, const std::vector<int>& support) {
  if (support == op.support()) return op;
  if (!strictly_increasing(support)) throw PreconditionError("support must be strictly increasing");
  std::vector<std::size_t> pos, cpos;
  std::size_t k = 0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (k < op.support().size() && op.support()[k] == support[i]) {
      pos.push_back(i);
      ++k;
    } else {
      cpos.push_back(i);
    }
  }
  if (k != op.support().size()) throw PreconditionError("target support does not contain operator support");
  const int d = op.site_dim();
  const auto off = digit_offsets(d, pos);
  const auto coff = digit_offsets(d, cpos);
  const Eigen::Index dim = pow_index(d, support.size());
  Matrix out = Matrix::Zero(dim, dim);
  const Matrix& m = op.coeffs();
  for (Eigen::Index c : coff)
    for (Eigen::Index b = 0; b < m.cols(); ++b)
      for (Eigen::Index a = 0; a < m.rows(); ++a)
        out(off[static_cast<std::size_t>(a)] + c, off[static_cast<std::size_t>(b)] + c) = m(a, b);
  return LocalOperator(support, std::move(out), d);
}

LocalOperator operator+(const LocalOperator& a, const LocalOperator& b) {
  require_same_dim(a, b);
  const auto s = support_union(a.support(), b.support());
  return LocalOperator(s, extend_to(a, s).coeffs() + extend_to(b, s).coeffs(), a.site_dim());
}

LocalOperator operator-(const LocalOperator& a, const LocalOperator& b) {
  require_same_dim(a, b);
  const auto s = support_union(a.support(), b.support());
  return LocalOperator(s, extend_to(a, s).coeffs() - extend_to(b, s).coeffs(), a.site_dim());
}

LocalOperator operator-(const LocalOperator& a) { return LocalOperator(a.support(), -a.coeffs(), a.site_dim()); }

LocalOperator operator*(cd s, const LocalOperator& a) {
  return LocalOperator(a.support(), s * a.coeffs(), a.site_dim());
}

LocalOperator operator*(const LocalOperator& a, const LocalOperator& b) {
  require_same_dim(a, b);
  const auto s = support_union(a.support(), b.support());
  return LocalOperator(s, extend_to(a, s).coeffs() * extend_to(b, s).coeffs(), a.site_dim());
}

LocalOperator& operator+=(LocalOperator& a, const LocalOperator& b) {
  a = a + b;
  return a;
}

LocalOperator commutator(const LocalOperator& a, const LocalOperator& b) {
  require_same_dim(a, b);
  const auto s = support_union(a.support(), b.support());
  const Matrix A = extend_to(a, s).coeffs();
  const Matrix B = extend_to(b, s).coeffs();
  return LocalOperator(s, A * B - B * A, a.site_dim());
}

double max_abs_diff(const LocalOperator& a, const LocalOperator& b) { return (a - b).max_abs(); }

LocalOperator partial_trace(const LocalOperator& op, int site) {
  const auto& sup = op.support();
  const auto it = std::find(sup.begin(), sup.end(), site);
  if (it == sup.end()) throw PreconditionError("partial trace over a site outside the support");
  const std::size_t p = static_cast<std::size_t>(it - sup.begin());
  std::vector<int> rest;
  std::vector<std::size_t> rpos;
  for (std::size_t i = 0; i < sup.size(); ++i)
    if (i != p) {
      rest.push_back(sup[i]);
      rpos.push_back(i);
    }
  const int d = op.site_dim();
  const auto off = digit_offsets(d, rpos);
  const Eigen::Index stride = pow_index(d, p);
  const Eigen::Index dim = pow_index(d, rest.size());
  Matrix out = Matrix::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b)
    for (Eigen::Index a = 0; a < dim; ++a) {
      cd acc = 0.0;
      for (int s = 0; s < d; ++s)
        acc += op.coeffs()(off[static_cast<std::size_t>(a)] + s * stride, off[static_cast<std::size_t>(b)] + s * stride);
      out(a, b) = acc;
    }
  return LocalOperator(std::move(rest), std::move(out), d);
}

LocalOperator reduce_support(const LocalOperator& op, double tol) {
  LocalOperator cur = op;
  const double scale = std::max(1.0, op.max_abs());
  const std::vector<int> sites = op.support();
  for (int s : sites) {
    LocalOperator reduced = (1.0 / op.site_dim()) * partial_trace(cur, s);
    if ((extend_to(reduced, cur.support()).coeffs() - cur.coeffs()).cwiseAbs().maxCoeff() <= tol * scale)
      cur = std::move(reduced);
  }
  return cur;
}

LocalOperator relabel(const LocalOperator& op, const std::function<int(int)>& f) {
  const auto& sup = op.support();
  const std::size_t s = sup.size();
  std::vector<int> mapped(s);
  std::transform(sup.begin(), sup.end(), mapped.begin(), f);
  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mapped[a] < mapped[b]; });
  std::vector<int> target(s);
  std::vector<std::size_t> newpos(s);
  for (std::size_t i = 0; i < s; ++i) {
    target[i] = mapped[order[i]];
    newpos[order[i]] = i;
  }
  if (!strictly_increasing(target)) throw PreconditionError("relabelling is not injective on the support");
  const int d = op.site_dim();
  const auto perm = digit_offsets(d, newpos);
  const Matrix& m = op.coeffs();
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index b = 0; b < m.cols(); ++b)
    for (Eigen::Index a = 0; a < m.rows(); ++a)
      out(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]) = m(a, b);
  return LocalOperator(std::move(target), std::move(out), d);
}

LocalOperator shift(const LocalOperator& op, int x) {
  return relabel(op, [x](int s) { return s + x; });
}

LocalOperator translate(const LocalOperator& op, int x, const ChainConfig& chain) {
  for (int s : op.support())
    if (s < 0 || s >= chain.n_sites) throw PreconditionError("operator support lies outside the chain");
  return relabel(op, [&](int s) { return chain.wrap(static_cast<long long>(s) + x); });
}

MatrixUnitBasis::MatrixUnitBasis(int site_dim) : site_dim_(site_dim) {
  if (site_dim < 2) throw PreconditionError("site dimension must be at least 2");
}

Matrix MatrixUnitBasis::unit(int i, int j) const {
  Matrix e = Matrix::Zero(site_dim_, site_dim_);
  e(i, j) = 1.0;
  return e;
}

std::vector<MatrixUnitBasis::Term> MatrixUnitBasis::decompose(const LocalOperator& op, double drop_tol) const {
  if (op.site_dim() != site_dim_) throw PreconditionError("site dimension mismatch");
  const std::size_t s = op.support().size();
  std::vector<Term> out;
  const Matrix& m = op.coeffs();
  for (Eigen::Index b = 0; b < m.cols(); ++b)
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
      if (std::abs(m(a, b)) <= drop_tol) continue;
      Term t{std::vector<int>(s), std::vector<int>(s), m(a, b)};
      Eigen::Index ra = a, rb = b;
      for (std::size_t k = 0; k < s; ++k) {
        t.rows[k] = static_cast<int>(ra % site_dim_);
        t.cols[k] = static_cast<int>(rb % site_dim_);
        ra /= site_dim_;
        rb /= site_dim_;
      }
      out.push_back(std::move(t));
    }
  return out;
}

LocalOperator MatrixUnitBasis::reconstruct(const std::vector<Term>& terms, const std::vector<int>& support) const {
  const Eigen::Index dim = pow_index(site_dim_, support.size());
  Matrix acc = Matrix::Zero(dim, dim);
  for (const Term& t : terms) {
    if (t.rows.size() != support.size() || t.cols.size() != support.size())
      throw PreconditionError("term does not match support");
    std::vector<Matrix> f;
    for (std::size_t k = 0; k < support.size(); ++k) f.push_back(unit(t.rows[k], t.cols[k]));
    acc += t.coeff * tensor_sites(f);
  }
  return LocalOperator(support, std::move(acc), site_dim_);
}

}  // namespace nesslab
