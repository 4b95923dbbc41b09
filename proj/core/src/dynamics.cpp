#include "nesslab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>

#include "nesslab/global_operator.hpp"
#include "nesslab/io.hpp"
#include "nesslab/models.hpp"

namespace nesslab {

EvolutionContext EvolutionContext::from_dense(const GlobalOperator& h, const ChainConfig& chain) {
  chain.validate();
  const auto dim = static_cast<Eigen::Index>(chain.dimension());
  if (h.rows() != dim || h.cols() != dim) throw PreconditionError("Hamiltonian does not match the chain");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors(), chain};
}

EvolutionContext EvolutionContext::from_basis(const JointBasis& basis) {
  const Matrix u = basis.dense_eigenvectors();
  const auto labels = basis.all_labels();
  std::vector<Eigen::Index> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return labels[static_cast<std::size_t>(a)].energy < labels[static_cast<std::size_t>(b)].energy;
  });
  EvolutionContext ctx{RealVector(u.cols()), Matrix(u.rows(), u.cols()), basis.chain()};
  for (Eigen::Index i = 0; i < u.cols(); ++i) {
    ctx.eigenvalues(i) = labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].energy;
    ctx.eigenvectors.col(i) = u.col(order[static_cast<std::size_t>(i)]);
  }
  return ctx;
}

double EvolutionContext::reconstruction_residual(const GlobalOperator& h) const {
  const Matrix r = eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint() - h;
  return r.cwiseAbs().maxCoeff() / std::max(1e-300, operator_norm(h));
}

GlobalOperator evolve(const GlobalOperator& a, const EvolutionContext& ctx, double t) {
  if (a.rows() != ctx.eigenvectors.rows() || a.cols() != ctx.eigenvectors.rows())
    throw PreconditionError("operator does not match the evolution context");
  Matrix b = ctx.eigenvectors.adjoint() * a * ctx.eigenvectors;
  const Eigen::Index n = b.rows();
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) b(r, c) *= std::polar(1.0, (ctx.eigenvalues(r) - ctx.eigenvalues(c)) * t);
  return ctx.eigenvectors * b * ctx.eigenvectors.adjoint();
}

void LRBoundParams::validate() const {
  if (d1 < 0 || d2 < 0) throw PreconditionError("support spans must be nonnegative");
  if (norm_a < 0.0 || norm_b < 0.0) throw PreconditionError("norms must be nonnegative");
  if (site_dim < 2) throw PreconditionError("site dimension must be at least 2");
  if (std::abs(x) <= d1 + d2) throw PreconditionError("bound requires |x| > d1 + d2");
}

double lr_bound(const LRBoundParams& p, double t) {
  p.validate();
  const double pre = 2.0 * std::pow(static_cast<double>(p.site_dim), p.d1 + p.d2) * p.norm_a * p.norm_b *
                     static_cast<double>(p.d1) * static_cast<double>(p.d2);
  if (pre == 0.0) return 0.0;
  return pre * std::exp(-(std::abs(p.x) - p.d1 - p.d2) + 2.0 * p.velocity * std::abs(t));
}

int site_span(const LocalOperator& op) {
  if (op.support().empty()) return 0;
  return op.max_site() - op.min_site() + 1;
}

double default_empirical_velocity(const Interaction& phi) {
  double worst = 0.0;
  for (std::size_t c = 0; c < phi.terms().size(); ++c) worst = std::max(worst, phi.placed(c, 0).norm());
  return 4.0 * worst * phi.range();
}

namespace {

using Blocks = std::map<std::pair<int, int>, Matrix>;

Blocks eigen_blocks(const JointBasis& basis, const LocalOperator& op) {
  OperatorSum sum(basis.chain());
  sum.add(op);
  const auto& sec = basis.sectors();
  std::set<std::pair<int, int>> pairs;
  for (int c = 0; c < sec.count(); ++c)
    for (std::uint64_t s : sec.states(c)) sum.apply(s, [&](std::uint64_t t, cd) { pairs.insert({sec.sector_of(t), c}); });
  Blocks out;
  for (const auto& p : pairs) out.emplace(p, basis.transform(sum, p.first, p.second));
  return out;
}

void apply_phases(Matrix& m, const std::vector<EigenLabel>& rows, const std::vector<EigenLabel>& cols, double t) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      m(r, c) *= std::polar(1.0, (rows[static_cast<std::size_t>(r)].energy - cols[static_cast<std::size_t>(c)].energy) * t);
}

double commutator_norm(const JointBasis& basis, const Blocks& a, const Blocks& b, double t, bool hermitian_diag) {
  Blocks at = a;
  for (auto& [key, m] : at) apply_phases(m, basis.labels(key.first), basis.labels(key.second), t);
  if (hermitian_diag) {
    // [A, B] = X - X^dagger with X = A B when both are Hermitian
    double best = 0.0;
    for (const auto& [key, m] : at) {
      const Matrix& bm = b.at(key);
      const Matrix x = m * bm;
      const Matrix c = x - x.adjoint();
      best = std::max(best, operator_norm(c));
    }
    return best;
  }
  Blocks comm;
  for (const auto& [ka, ma] : at)
    for (const auto& [kb, mb] : b) {
      if (ka.second == kb.first) {
        auto [it, fresh] = comm.try_emplace({ka.first, kb.second}, Matrix::Zero(ma.rows(), mb.cols()));
        it->second.noalias() += ma * mb;
      }
      if (kb.second == ka.first) {
        auto [it, fresh] = comm.try_emplace({kb.first, ka.second}, Matrix::Zero(mb.rows(), ma.cols()));
        it->second.noalias() -= mb * ma;
      }
    }
  return block_operator_norm(comm);
}

bool diagonal_only(const Blocks& b) {
  return std::all_of(b.begin(), b.end(), [](const auto& kv) { return kv.first.first == kv.first.second; });
}

}  // namespace

LRScanResult lr_scan(const JointBasis& basis, const Interaction& phi, const LocalOperator& a, const LocalOperator& b,
                     const std::vector<int>& x_values, const std::vector<double>& t_values,
                     const LRScanOptions& options) {
  const ChainConfig& chain = basis.chain();
  LRScanResult out;
  out.velocity = lr_velocity(phi);
  out.v_emp = options.v_emp > 0.0 ? options.v_emp : default_empirical_velocity(phi);
  LRBoundParams p;
  p.d1 = site_span(a);
  p.d2 = site_span(b);
  p.norm_a = a.norm();
  p.norm_b = b.norm();
  p.velocity = out.velocity;
  p.site_dim = chain.site_dim;
  const Blocks bb = eigen_blocks(basis, b);
  for (int x : x_values) {
    std::optional<Blocks> ab;
    bool placeable = true;
    try {
      ab = eigen_blocks(basis, translate(a, x, chain));
    } catch (const PreconditionError&) {
      placeable = false;
    }
    const bool herm = placeable && a.is_hermitian() && b.is_hermitian() && diagonal_only(*ab) && diagonal_only(bb);
    for (double t : t_values) {
      LRScanRow row{x, t, 0.0, 0.0, false};
      row.excluded = !placeable || std::abs(x) <= p.d1 + p.d2 ||
                     static_cast<double>(std::abs(x)) + 2.0 * out.v_emp * std::abs(t) >= chain.n_sites;
      if (row.excluded) {
        ++out.excluded;
      } else {
        p.x = x;
        row.bound = lr_bound(p, t);
        row.empirical = commutator_norm(basis, *ab, bb, t, herm);
        if (row.empirical > row.bound) ++out.violations;
      }
      out.rows.push_back(row);
    }
  }
  if (!out.rows.empty() && out.excluded == static_cast<int>(out.rows.size()))
    throw PreconditionError("every scan point lies beyond the wrap horizon or inside the support gap");
  return out;
}

LRScanResult lr_scan(const Interaction& phi, const LocalOperator& a, const LocalOperator& b,
                     const std::vector<int>& x_values, const std::vector<double>& t_values, const ChainConfig& chain,
                     const LRScanOptions& options) {
  const JointBasis basis = JointBasis::build(chain_hamiltonian_sum(phi, chain), options.charge, nullptr);
  return lr_scan(basis, phi, a, b, x_values, t_values, options);
}

std::string lr_scan_csv(const LRScanResult& result) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : result.rows)
    rows.push_back({std::to_string(r.x), format_double(r.t), format_double(r.empirical), format_double(r.bound),
                    r.excluded ? "1" : "0"});
  return csv_text({"x", "t", "empirical_norm", "bound", "excluded_flag"}, rows);
}

namespace {

// (e^x - 1) / x and (e^x - 1 - x) / x^2 without cancellation near 0
double phi1(double x) { return x < 1e-5 ? 1.0 + x / 2.0 + x * x / 6.0 : std::expm1(x) / x; }
double phi2(double x) { return x < 1e-3 ? 0.5 + x / 6.0 + x * x / 24.0 + x * x * x / 120.0 : (std::expm1(x) - x) / (x * x); }

}  // namespace

double deviation_bound_Z(double velocity, int range, int site_dim, int M, int L, double t, const DeviationNorms& norms) {
  if (M < 1 || L <= M) throw PreconditionError("deviation bound needs 1 <= M < L");
  if (velocity < 0.0) throw PreconditionError("velocity must be nonnegative");
  const double r = range;
  const double base = site_dim;
  const double at = std::abs(t);
  const double x = 2.0 * velocity * at;
  const double first = 2.0 * std::pow(base, 2 * r - 1) * norms.n * norms.J * (2 * r - 1) * std::exp(-M) /
                       (1.0 - std::exp(-1.0)) * std::exp(2 * r - 1) * (at * phi1(x));
  const double second = 2.0 * norms.j * norms.J0 * std::pow(base, 4 * r - 4) * (2 * r - 2) * (2 * r - 2) *
                        std::exp(4 * r - 4) * (std::exp(-M) + std::exp(-(L - M))) * (at * at * phi2(x));
  return first + second;
}

double deviation_bound_Z(const Interaction& phi, int M, int L, double t, const DeviationNorms& norms) {
  return deviation_bound_Z(lr_velocity(phi), phi.range(), phi.site_dim(), M, L, t, norms);
}

}  // namespace nesslab
