#include "nesslab/joint_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "nesslab/global_operator.hpp"

namespace nesslab {

namespace {

// exp(i 2 pi p / n) with p reduced first so equal arguments give equal bits
cd root_of_unity(long long p, int n) {
  const long long r = ((p % n) + n) % n;
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n));
}

void fix_phases(Matrix& w) {
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    Eigen::Index idx = 0;
    w.col(c).cwiseAbs().maxCoeff(&idx);
    const cd v = w(idx, c);
    if (std::abs(v) > 0.0) w.col(c) *= std::conj(v) / std::abs(v);
  }
}

struct Diagonalized {
  Matrix w;
  RealVector energies;
  RealVector bias;
};

// Eigenvectors of h; degenerate clusters rotated to diagonalize b.
Diagonalized diagonalize(const Matrix& h, const Matrix* b, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  Diagonalized out{es.eigenvectors(), es.eigenvalues(), RealVector::Zero(h.rows())};
  const Eigen::Index n = h.rows();
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && out.energies(end) - out.energies(end - 1) <= tol * (1.0 + std::abs(out.energies(end)))) ++end;
    if (b != nullptr) {
      const Eigen::Index len = end - start;
      Matrix wc = out.w.middleCols(start, len);
      Matrix bc = wc.adjoint() * (*b) * wc;
      if (len == 1) {
        out.bias(start) = bc(0, 0).real();
      } else {
        Eigen::SelfAdjointEigenSolver<Matrix> bs(0.5 * (bc + bc.adjoint()));
        if (bs.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
        out.w.middleCols(start, len) = wc * bs.eigenvectors();
        out.bias.segment(start, len) = bs.eigenvalues();
        // keep the level's energy uniform across the rotated vectors
        const double e = out.energies.segment(start, len).mean();
        out.energies.segment(start, len).setConstant(e);
      }
    }
    start = end;
  }
  fix_phases(out.w);
  return out;
}

}  // namespace

double momentum_of(int m, int n_sites) {
  const int r = ((m % n_sites) + n_sites) % n_sites;
  const int wrapped = 2 * r > n_sites ? r - n_sites : r;
  return 2.0 * std::numbers::pi * static_cast<double>(wrapped) / static_cast<double>(n_sites);
}

JointBasis JointBasis::build(const OperatorSum& h, const std::optional<Matrix>& n0, const OperatorSum* bias,
                             const JointSpectrumOptions& options) {
  JointBasis out;
  out.chain_ = h.chain();
  out.chain_.validate();
  out.sectors_ = ChargeSectors::build(out.chain_, n0);
  out.momentum_ = options.use_momentum && out.chain_.periodic();
  const int n = out.chain_.n_sites;
  out.data_.resize(static_cast<std::size_t>(out.sectors_.count()));

  for (int q = 0; q < out.sectors_.count(); ++q) {
    const auto& states = out.sectors_.states(q);
    const auto ns = static_cast<Eigen::Index>(states.size());
    SectorData& sd = out.data_[static_cast<std::size_t>(q)];

    if (!out.momentum_) {
      for (Eigen::Index p = 0; p < ns; ++p) sd.columns.push_back({{p, 1.0}});
      Matrix hb = Matrix::Zero(ns, ns), bb;
      for (Eigen::Index c = 0; c < ns; ++c)
        h.apply(states[static_cast<std::size_t>(c)], [&](std::uint64_t t, cd v) {
          if (out.sectors_.sector_of(t) != q) throw PreconditionError("Hamiltonian does not conserve the charge");
          hb(out.sectors_.position(t), c) += v;
        });
      if (bias != nullptr) {
        bb = Matrix::Zero(ns, ns);
        for (Eigen::Index c = 0; c < ns; ++c)
          bias->apply(states[static_cast<std::size_t>(c)], [&](std::uint64_t t, cd v) {
            if (out.sectors_.sector_of(t) == q) bb(out.sectors_.position(t), c) += v;
          });
      }
      Diagonalized dz = diagonalize(hb, bias ? &bb : nullptr, options.degeneracy_tol);
      for (Eigen::Index i = 0; i < ns; ++i)
        sd.labels.push_back({dz.energies(i), 0, 0.0, dz.bias(i), q});
      sd.blocks.push_back({0, 0, std::move(dz.w)});
      continue;
    }

    // translation orbits inside the sector
    std::vector<int> orbit_of(static_cast<std::size_t>(ns), -1), shift_of(static_cast<std::size_t>(ns), 0);
    std::vector<Eigen::Index> rep_pos;
    std::vector<int> orbit_size;
    for (Eigen::Index p = 0; p < ns; ++p) {
      if (orbit_of[static_cast<std::size_t>(p)] >= 0) continue;
      const int o = static_cast<int>(rep_pos.size());
      const std::uint64_t s0 = states[static_cast<std::size_t>(p)];
      std::uint64_t cur = s0;
      int l = 0;
      do {
        if (out.sectors_.sector_of(cur) != q) throw PreconditionError("charge is not translation invariant");
        const auto cp = static_cast<std::size_t>(out.sectors_.position(cur));
        orbit_of[cp] = o;
        shift_of[cp] = l++;
        cur = shift_index(cur, out.chain_);
      } while (cur != s0);
      rep_pos.push_back(p);
      orbit_size.push_back(l);
    }
    const std::size_t n_orbits = rep_pos.size();

    for (int m = 0; m < n; ++m) {
      std::vector<int> col_in_block(n_orbits, -1);
      std::vector<std::size_t> block_orbits;
      const auto offset = static_cast<Eigen::Index>(sd.columns.size());
      for (std::size_t o = 0; o < n_orbits; ++o) {
        const int R = orbit_size[o];
        if ((static_cast<long long>(m) * R) % n != 0) continue;
        col_in_block[o] = static_cast<int>(block_orbits.size());
        block_orbits.push_back(o);
        std::vector<Entry> col;
        std::uint64_t cur = states[static_cast<std::size_t>(rep_pos[o])];
        const double norm = 1.0 / std::sqrt(static_cast<double>(R));
        for (int j = 0; j < R; ++j) {
          col.push_back({out.sectors_.position(cur), norm * root_of_unity(static_cast<long long>(m) * j, n)});
          cur = shift_index(cur, out.chain_);
        }
        sd.columns.push_back(std::move(col));
      }
      const auto b = static_cast<Eigen::Index>(block_orbits.size());
      if (b == 0) continue;
      auto block_matrix = [&](const OperatorSum& op, bool strict) {
        Matrix mb = Matrix::Zero(b, b);
        for (Eigen::Index c = 0; c < b; ++c) {
          const std::size_t o = block_orbits[static_cast<std::size_t>(c)];
          const double Ro = orbit_size[o];
          op.apply(states[static_cast<std::size_t>(rep_pos[o])], [&](std::uint64_t t, cd v) {
            if (out.sectors_.sector_of(t) != q) {
              if (strict) throw PreconditionError("Hamiltonian does not conserve the charge");
              return;
            }
            const auto tp = static_cast<std::size_t>(out.sectors_.position(t));
            const int o2 = orbit_of[tp];
            const int c2 = col_in_block[static_cast<std::size_t>(o2)];
            if (c2 < 0) return;
            const double R2 = orbit_size[static_cast<std::size_t>(o2)];
            mb(c2, c) += v * root_of_unity(-static_cast<long long>(m) * shift_of[tp], n) * std::sqrt(Ro / R2);
          });
        }
        return mb;
      };
      const Matrix hb = block_matrix(h, true);
      Matrix bb;
      if (bias != nullptr) bb = block_matrix(*bias, false);
      Diagonalized dz = diagonalize(hb, bias ? &bb : nullptr, options.degeneracy_tol);
      for (Eigen::Index i = 0; i < b; ++i) sd.labels.push_back({dz.energies(i), m, momentum_of(m, n), dz.bias(i), q});
      sd.blocks.push_back({m, offset, std::move(dz.w)});
    }
    if (static_cast<Eigen::Index>(sd.columns.size()) != ns) throw NumericalError("momentum basis is incomplete");
  }
  return out;
}

Matrix JointBasis::transform(const OperatorSum& a, int row_sector, int col_sector) const {
  const SectorData& cd_ = data_[static_cast<std::size_t>(col_sector)];
  const SectorData& rd = data_[static_cast<std::size_t>(row_sector)];
  const auto& cstates = sectors_.states(col_sector);
  const auto nr = static_cast<Eigen::Index>(sectors_.states(row_sector).size());
  const auto nc = static_cast<Eigen::Index>(cd_.columns.size());
  Matrix x = Matrix::Zero(nr, nc);
  for (Eigen::Index c = 0; c < nc; ++c)
    for (const Entry& e : cd_.columns[static_cast<std::size_t>(c)])
      a.apply(cstates[static_cast<std::size_t>(e.pos)], [&](std::uint64_t t, cd v) {
        if (sectors_.sector_of(t) == row_sector) x(sectors_.position(t), c) += v * e.coeff;
      });
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(rd.columns.size()), nc);
  for (std::size_t r = 0; r < rd.columns.size(); ++r)
    for (const Entry& e : rd.columns[r]) y.row(static_cast<Eigen::Index>(r)) += std::conj(e.coeff) * x.row(e.pos);
  Matrix z(y.rows(), y.cols());
  for (const Block& rb : rd.blocks)
    for (const Block& cb : cd_.blocks) {
      const auto blk = y.block(rb.offset, cb.offset, rb.w.rows(), cb.w.rows());
      if (blk.cwiseAbs().maxCoeff() == 0.0) {
        z.block(rb.offset, cb.offset, rb.w.rows(), cb.w.rows()).setZero();
        continue;
      }
      z.block(rb.offset, cb.offset, rb.w.rows(), cb.w.rows()).noalias() = rb.w.adjoint() * (blk * cb.w);
    }
  return z;
}

Matrix JointBasis::sector_eigenvectors(int q) const {
  const SectorData& sd = data_[static_cast<std::size_t>(q)];
  const auto ns = static_cast<Eigen::Index>(sd.columns.size());
  Matrix u = Matrix::Zero(ns, ns);
  for (const Block& b : sd.blocks)
    for (Eigen::Index j = 0; j < b.w.rows(); ++j)
      for (const Entry& e : sd.columns[static_cast<std::size_t>(b.offset + j)])
        u.row(e.pos).segment(b.offset, b.w.cols()) += e.coeff * b.w.row(j);
  return u;
}

Matrix JointBasis::dense_eigenvectors() const {
  const auto dim = static_cast<Eigen::Index>(chain_.dimension());
  Matrix u = Matrix::Zero(dim, dim);
  Eigen::Index off = 0;
  for (int q = 0; q < sector_count(); ++q) {
    const Matrix us = sector_eigenvectors(q);
    const auto& states = sectors_.states(q);
    for (Eigen::Index p = 0; p < us.rows(); ++p)
      u.row(static_cast<Eigen::Index>(states[static_cast<std::size_t>(p)])).segment(off, us.cols()) = us.row(p);
    off += us.cols();
  }
  return u;
}

std::vector<EigenLabel> JointBasis::all_labels() const {
  std::vector<EigenLabel> out;
  for (const auto& sd : data_) out.insert(out.end(), sd.labels.begin(), sd.labels.end());
  return out;
}

double JointBasis::residual(const OperatorSum& h) const {
  double worst = 0.0, hmax = 1.0;
  for (int q = 0; q < sector_count(); ++q) {
    const auto& states = sectors_.states(q);
    const auto ns = static_cast<Eigen::Index>(states.size());
    Matrix hs = Matrix::Zero(ns, ns);
    for (Eigen::Index c = 0; c < ns; ++c)
      h.apply(states[static_cast<std::size_t>(c)], [&](std::uint64_t t, cd v) {
        if (sectors_.sector_of(t) == q) hs(sectors_.position(t), c) += v;
      });
    const Matrix u = sector_eigenvectors(q);
    RealVector e(ns);
    for (Eigen::Index i = 0; i < ns; ++i) e(i) = labels(q)[static_cast<std::size_t>(i)].energy;
    worst = std::max(worst, (hs * u - u * e.asDiagonal()).cwiseAbs().maxCoeff());
    hmax = std::max(hmax, hs.cwiseAbs().maxCoeff());
  }
  return worst / hmax;
}

DenseJointSpectrum joint_spectrum(const GlobalOperator& H, const GlobalOperator& T, const ChainConfig& chain,
                                  double commute_tol) {
  chain.validate();
  if (!chain.periodic()) throw PreconditionError("joint spectrum requires a periodic chain");
  const auto dim = static_cast<Eigen::Index>(chain.dimension());
  if (H.rows() != dim || H.cols() != dim || T.rows() != dim || T.cols() != dim)
    throw PreconditionError("operator dimensions do not match the chain");
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H * T - T * H).cwiseAbs().maxCoeff() > commute_tol * scale)
    throw PreconditionError("Hamiltonian does not commute with the shift");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(dim), -1);
  for (Eigen::Index s = 0; s < dim; ++s) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      const cd v = T(r, s);
      if (v == cd{1.0, 0.0}) {
        if (perm[static_cast<std::size_t>(s)] >= 0) throw PreconditionError("shift is not a permutation");
        perm[static_cast<std::size_t>(s)] = r;
      } else if (v != cd{0.0, 0.0}) {
        throw PreconditionError("shift is not a permutation");
      }
    }
    if (perm[static_cast<std::size_t>(s)] < 0) throw PreconditionError("shift is not a permutation");
  }
  const int n = chain.n_sites;
  std::vector<std::vector<Eigen::Index>> orbits;
  std::vector<char> seen(static_cast<std::size_t>(dim), 0);
  for (Eigen::Index s = 0; s < dim; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    std::vector<Eigen::Index> orb;
    Eigen::Index cur = s;
    do {
      seen[static_cast<std::size_t>(cur)] = 1;
      orb.push_back(cur);
      cur = perm[static_cast<std::size_t>(cur)];
    } while (cur != s);
    if (n % static_cast<int>(orb.size()) != 0) throw PreconditionError("shift does not have period n_sites");
    orbits.push_back(std::move(orb));
  }
  DenseJointSpectrum out{Matrix::Zero(dim, dim), RealVector::Zero(dim), {}, RealVector::Zero(dim)};
  Eigen::Index col = 0;
  for (int m = 0; m < n; ++m) {
    std::vector<const std::vector<Eigen::Index>*> compatible;
    for (const auto& orb : orbits)
      if ((static_cast<long long>(m) * static_cast<long long>(orb.size())) % n == 0) compatible.push_back(&orb);
    const auto b = static_cast<Eigen::Index>(compatible.size());
    if (b == 0) continue;
    Matrix v = Matrix::Zero(dim, b);
    for (Eigen::Index c = 0; c < b; ++c) {
      const auto& orb = *compatible[static_cast<std::size_t>(c)];
      const double norm = 1.0 / std::sqrt(static_cast<double>(orb.size()));
      for (std::size_t j = 0; j < orb.size(); ++j) v(orb[j], c) = norm * root_of_unity(static_cast<long long>(m) * static_cast<long long>(j), n);
    }
    Matrix hb = v.adjoint() * H * v;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (hb + hb.adjoint()));
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    out.vectors.middleCols(col, b) = v * es.eigenvectors();
    out.energies.segment(col, b) = es.eigenvalues();
    for (Eigen::Index i = 0; i < b; ++i) {
      out.m.push_back(m);
      out.momenta(col + i) = momentum_of(m, n);
    }
    col += b;
  }
  return out;
}

}  // namespace nesslab
