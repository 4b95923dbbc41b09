#pragma once

#include <optional>
#include <vector>

#include "nesslab/chain.hpp"
#include "nesslab/sector.hpp"
#include "nesslab/types.hpp"

namespace nesslab {

struct EigenLabel {
  double energy = 0.0;
  int m = 0;            // momentum index; T|n> = exp(-i k_m)|n>
  double momentum = 0.0;  // k_m = 2 pi m / n_sites wrapped into (-pi, pi]
  double bias = 0.0;    // eigenvalue of the tie-breaking operator
  int sector = 0;
};

double momentum_of(int m, int n_sites);

struct JointSpectrumOptions {
  double degeneracy_tol = 1e-9;
  bool use_momentum = true;  // ignored on open chains
};

/// Simultaneous eigenbasis of a Hamiltonian, the lattice shift (periodic
/// chains) and a diagonal total charge, computed block by block. Within
/// degenerate energy levels of a block the optional bias operator is
/// diagonalized. Eigenvector phases are fixed so that the first component
/// of largest modulus is real and positive.
class JointBasis {
 public:
  static JointBasis build(const OperatorSum& h, const std::optional<Matrix>& n0, const OperatorSum* bias,
                          const JointSpectrumOptions& options = {});

  const ChainConfig& chain() const { return chain_; }
  const ChargeSectors& sectors() const { return sectors_; }
  int sector_count() const { return sectors_.count(); }
  Eigen::Index sector_size(int q) const { return static_cast<Eigen::Index>(data_[static_cast<std::size_t>(q)].labels.size()); }
  const std::vector<EigenLabel>& labels(int q) const { return data_[static_cast<std::size_t>(q)].labels; }
  bool has_momentum() const { return momentum_; }
  std::uint64_t dimension() const { return chain_.dimension(); }

  /// Matrix elements <row eigenvector| A |col eigenvector> between the
  /// eigenbases of two sectors.
  Matrix transform(const OperatorSum& a, int row_sector, int col_sector) const;

  /// Eigenvectors of a sector as columns, in the sector's product basis.
  Matrix sector_eigenvectors(int q) const;

  /// Full unitary (columns ordered by sector, then sector-local index) and
  /// the matching labels; for small chains.
  Matrix dense_eigenvectors() const;
  std::vector<EigenLabel> all_labels() const;

  /// max over sectors of ||H U - U E|| / max(1, ||H||), estimated entrywise.
  double residual(const OperatorSum& h) const;

 private:
  struct Entry {
    Eigen::Index pos;  // position within the sector
    cd coeff;
  };
  struct Block {
    int m = 0;
    Eigen::Index offset = 0;
    Matrix w;
  };
  struct SectorData {
    std::vector<std::vector<Entry>> columns;  // momentum basis vectors
    std::vector<Block> blocks;
    std::vector<EigenLabel> labels;
  };

  ChainConfig chain_;
  ChargeSectors sectors_;
  bool momentum_ = false;
  std::vector<SectorData> data_;
};

/// Dense joint eigendecomposition of H and a shift permutation T, used as an
/// independent route on small chains.
struct DenseJointSpectrum {
  Matrix vectors;
  RealVector energies;
  std::vector<int> m;
  RealVector momenta;
};

DenseJointSpectrum joint_spectrum(const GlobalOperator& H, const GlobalOperator& T, const ChainConfig& chain,
                                  double commute_tol = 1e-10);

}  // namespace nesslab
