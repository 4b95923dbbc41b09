#pragma once

#include <span>
#include <utility>
#include <vector>

#include "nesslab/chain.hpp"
#include "nesslab/interaction.hpp"
#include "nesslab/local_operator.hpp"
#include "nesslab/sector.hpp"

namespace nesslab {

struct Model {
  Interaction phi;
  ChargeSpec charge;
};

namespace spin {
Matrix sigma(int i);  // Pauli matrices, basis 0 = up
Matrix s(int i);      // sigma(i) / 2
}  // namespace spin

namespace fermion {
Matrix annihilate();  // |0><1|, 0 = empty
Matrix number();
}  // namespace fermion

Model build_xxz_model(double lambda_aniso);
/// v[s-1] is the density-density coupling at distance s; range = v.size().
Model build_fermion_model(double t_hop, std::span<const double> v);

/// H over all translates of the canonical terms contained in [first, last],
/// as an operator on lattice sites.
LocalOperator window_hamiltonian(const Interaction& phi, int first, int last);
LocalOperator window_charge(const ChargeSpec& spec, int first, int last, int site_dim);

/// Maps a lattice-coordinate operator onto the chain with lattice site 0 at
/// chain site `origin` (wrap on periodic chains, range-checked on open ones).
LocalOperator place_on_chain(const LocalOperator& op, const ChainConfig& chain, int origin = 0);

/// Terms of H_[first, last] as chain operators. A window covering the whole
/// periodic chain yields the ring Hamiltonian.
OperatorSum hamiltonian_sum(const Interaction& phi, int first, int last, const ChainConfig& chain, int origin = 0);
OperatorSum chain_hamiltonian_sum(const Interaction& phi, const ChainConfig& chain);
OperatorSum charge_sum(const ChargeSpec& spec, int first, int last, const ChainConfig& chain, int origin = 0);

GlobalOperator local_hamiltonian(const Interaction& phi, int first, int last, const ChainConfig& chain, int origin = 0);
GlobalOperator chain_hamiltonian(const Interaction& phi, const ChainConfig& chain);
GlobalOperator charge_operator(const ChargeSpec& spec, int first, int last, const ChainConfig& chain, int origin = 0);

/// Max of ||[N_W, H_W]|| over windows W = [0, l-1], l <= max_window, plus
/// the full ring on periodic chains.
double check_conservation(const Interaction& phi, const ChargeSpec& spec, const ChainConfig& chain, int max_window = 8);

struct CurrentGeometry {
  int L = 0;
  int M = 0;
  int r = 1;
  bool strict = true;

  /// strict: L > M, M > 2r, L - M > 2r. Relaxed: M >= r, L >= M.
  /// Both require the arc [-L, M] to fit on the chain.
  void validate(const ChainConfig& chain) const;
};

/// i[N_(-inf,0], Phi] summed over the terms straddling the cut between
/// sites 0 and 1; equals the window current for every admissible geometry.
LocalOperator current_density(const Interaction& phi, const ChargeSpec& spec);

/// i[N_[-L,0], H_[-M,M]] reduced to its true support.
LocalOperator current_operator(const Interaction& phi, const ChargeSpec& spec, const CurrentGeometry& geom,
                               const ChainConfig& chain);

struct EnergyCurrents {
  LocalOperator plus;   // right boundary, [M-2r+1, M+r]
  LocalOperator minus;  // left boundary, [-M-r, -M+2r-1]
};

/// Splits i[H_[-M,M], H_[-M-r,M+r]] = J+ - J- by the boundary each term
/// straddles.
EnergyCurrents energy_current_operators(const Interaction& phi, int M, const ChainConfig& chain);

struct EnergyDensity {
  LocalOperator h;
  std::vector<LocalOperator> phi_s;  // telescoped pieces, index s - 1
};

EnergyDensity energy_density(const Interaction& phi);

struct BoundaryTerms {
  LocalOperator c_minus;  // within [-M, -M+2r]
  LocalOperator c_plus;   // within [M-2r, M]
};

/// H_[-M,M] - sum_{y=-M+r}^{M-r} tau_y(h), split by side.
BoundaryTerms boundary_terms(const Interaction& phi, int M);

double lr_velocity(const Interaction& phi);

}  // namespace nesslab
