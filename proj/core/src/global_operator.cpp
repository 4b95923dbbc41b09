#include "nesslab/global_operator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace nesslab {

GlobalOperator embed(const LocalOperator& op, const ChainConfig& chain) {
  chain.validate();
  if (op.site_dim() != chain.site_dim) throw PreconditionError("site dimension does not match chain");
  for (int s : op.support())
    if (s < 0 || s >= chain.n_sites) throw PreconditionError("support site outside the chain");
  return extend_to(op, site_range(0, chain.n_sites - 1)).coeffs();
}

GlobalOperator commutator(const GlobalOperator& a, const GlobalOperator& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw PreconditionError("commutator of mismatched operators");
  return a * b - b * a;
}

double comm_norm(const GlobalOperator& a, const GlobalOperator& b) { return operator_norm(commutator(a, b)); }

double operator_norm(const Matrix& a) {
  if (a.rows() != a.cols()) throw PreconditionError("operator norm of a non-square matrix");
  if (a.size() == 0) return 0.0;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const double tol = 1e-14 * scale;
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() <= tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  if ((a + a.adjoint()).cwiseAbs().maxCoeff() <= tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * I * (a - a.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

std::uint64_t shift_index(std::uint64_t s, const ChainConfig& chain) {
  const std::uint64_t top = ipow(static_cast<std::uint64_t>(chain.site_dim), chain.n_sites - 1);
  return (s % top) * static_cast<std::uint64_t>(chain.site_dim) + s / top;
}

GlobalOperator shift_unitary(const ChainConfig& chain) {
  chain.validate();
  if (!chain.periodic()) throw PreconditionError("shift unitary requires a periodic chain");
  const auto dim = static_cast<Eigen::Index>(chain.dimension());
  GlobalOperator t = GlobalOperator::Zero(dim, dim);
  for (Eigen::Index s = 0; s < dim; ++s)
    t(static_cast<Eigen::Index>(shift_index(static_cast<std::uint64_t>(s), chain)), s) = 1.0;
  return t;
}

}  // namespace nesslab
