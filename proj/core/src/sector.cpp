#include "nesslab/sector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/SVD>

#include "nesslab/global_operator.hpp"

namespace nesslab {

SiteAction::SiteAction(const LocalOperator& op, const ChainConfig& chain) : d_(static_cast<std::uint64_t>(chain.site_dim)) {
  if (op.site_dim() != chain.site_dim) throw PreconditionError("site dimension does not match chain");
  for (int s : op.support()) {
    if (s < 0 || s >= chain.n_sites) throw PreconditionError("support site outside the chain");
    strides_.push_back(ipow(d_, s));
  }
  std::uint64_t ls = 1;
  for (std::size_t k = 0; k < strides_.size(); ++k, ls *= d_) local_strides_.push_back(ls);
  const Matrix& m = op.coeffs();
  col_start_.push_back(0);
  for (Eigen::Index a = 0; a < m.cols(); ++a) {
    for (Eigen::Index b = 0; b < m.rows(); ++b) {
      if (m(b, a) == cd{0.0, 0.0}) continue;
      std::uint64_t off = 0, rest = static_cast<std::uint64_t>(b);
      for (std::size_t k = 0; k < strides_.size(); ++k) {
        off += (rest % d_) * strides_[k];
        rest /= d_;
      }
      targets_.push_back(off);
      values_.push_back(m(b, a));
    }
    col_start_.push_back(targets_.size());
  }
}

void OperatorSum::add(const LocalOperator& op) { terms_.emplace_back(op, chain_); }

GlobalOperator OperatorSum::dense() const {
  const auto dim = static_cast<Eigen::Index>(chain_.dimension());
  GlobalOperator out = GlobalOperator::Zero(dim, dim);
  for (Eigen::Index s = 0; s < dim; ++s)
    apply(static_cast<std::uint64_t>(s), [&](std::uint64_t t, cd v) { out(static_cast<Eigen::Index>(t), s) += v; });
  return out;
}

ChargeSectors ChargeSectors::build(const ChainConfig& chain, const std::optional<Matrix>& n0, double tol) {
  chain.validate();
  ChargeSectors out;
  const std::uint64_t dim = chain.dimension();
  out.sector_of_.assign(dim, 0);
  out.position_.assign(dim, 0);
  const bool diagonal =
      n0.has_value() && (n0->diagonal().asDiagonal().toDenseMatrix() - *n0).cwiseAbs().maxCoeff() <= 1e-14;
  if (!diagonal) {
    out.charges_ = {0.0};
    out.states_.resize(1);
    for (std::uint64_t s = 0; s < dim; ++s) {
      out.position_[s] = static_cast<Eigen::Index>(s);
      out.states_[0].push_back(s);
    }
    return out;
  }
  out.resolved_ = true;
  const auto d = static_cast<std::uint64_t>(chain.site_dim);
  std::vector<double> q(dim);
  for (std::uint64_t s = 0; s < dim; ++s) {
    double acc = 0.0;
    for (std::uint64_t r = s, k = 0; k < static_cast<std::uint64_t>(chain.n_sites); ++k, r /= d)
      acc += (*n0)(static_cast<Eigen::Index>(r % d), static_cast<Eigen::Index>(r % d)).real();
    q[s] = acc;
  }
  std::vector<double> sorted = q;
  std::sort(sorted.begin(), sorted.end());
  for (double v : sorted)
    if (out.charges_.empty() || v - out.charges_.back() > tol) out.charges_.push_back(v);
  out.states_.resize(out.charges_.size());
  for (std::uint64_t s = 0; s < dim; ++s) {
    auto it = std::lower_bound(out.charges_.begin(), out.charges_.end(), q[s] - tol);
    const int sec = static_cast<int>(it - out.charges_.begin());
    out.sector_of_[s] = sec;
    out.position_[s] = static_cast<Eigen::Index>(out.states_[static_cast<std::size_t>(sec)].size());
    out.states_[static_cast<std::size_t>(sec)].push_back(s);
  }
  return out;
}

SectorMatrix SectorMatrix::from_sum(const OperatorSum& op, const ChargeSectors& sectors) {
  SectorMatrix out;
  for (int c = 0; c < sectors.count(); ++c) {
    const auto& states = sectors.states(c);
    for (std::size_t j = 0; j < states.size(); ++j) {
      op.apply(states[j], [&](std::uint64_t t, cd v) {
        const int r = sectors.sector_of(t);
        auto it = out.blocks.find({r, c});
        if (it == out.blocks.end()) {
          const auto rows = static_cast<Eigen::Index>(sectors.states(r).size());
          it = out.blocks.emplace(std::make_pair(r, c), Matrix::Zero(rows, static_cast<Eigen::Index>(states.size()))).first;
        }
        it->second(sectors.position(t), static_cast<Eigen::Index>(j)) += v;
      });
    }
  }
  return out;
}

bool SectorMatrix::block_diagonal() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const auto& kv) { return kv.first.first == kv.first.second; });
}

double SectorMatrix::norm() const { return block_operator_norm(blocks); }

namespace {

double rectangular_norm(const Matrix& m) {
  if (m.rows() == m.cols()) return operator_norm(m);
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

double block_operator_norm(const std::map<std::pair<int, int>, Matrix>& blocks) {
  if (blocks.empty()) return 0.0;
  // rows and columns are separate index spaces; a component links row
  // sectors to column sectors through nonzero blocks
  std::map<int, int> parent;  // row sectors as r, column sectors as -(c+1)
  auto find = [&](int x) {
    if (!parent.count(x)) parent[x] = x;
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<int, Eigen::Index> rows, cols;
  for (const auto& [key, m] : blocks) {
    rows[key.first] = m.rows();
    cols[key.second] = m.cols();
    const int a = find(key.first), b = find(-(key.second + 1));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<int, std::vector<int>> comp_rows, comp_cols;
  for (const auto& [r, n] : rows) comp_rows[find(r)].push_back(r);
  for (const auto& [c, n] : cols) comp_cols[find(-(c + 1))].push_back(c);
  double best = 0.0;
  for (const auto& [root, rs] : comp_rows) {
    const auto& cs = comp_cols[root];
    if (rs.size() == 1 && cs.size() == 1) {
      best = std::max(best, rectangular_norm(blocks.at({rs[0], cs[0]})));
      continue;
    }
    std::map<int, Eigen::Index> roff, coff;
    Eigen::Index nr = 0, nc = 0;
    for (int r : rs) roff[r] = std::exchange(nr, nr + rows[r]);
    for (int c : cs) coff[c] = std::exchange(nc, nc + cols[c]);
    Matrix full = Matrix::Zero(nr, nc);
    for (int r : rs)
      for (int c : cs) {
        auto it = blocks.find({r, c});
        if (it != blocks.end()) full.block(roff[r], coff[c], rows[r], cols[c]) = it->second;
      }
    best = std::max(best, rectangular_norm(full));
  }
  return best;
}

}  // namespace nesslab
