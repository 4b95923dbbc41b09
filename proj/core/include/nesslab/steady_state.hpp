#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nesslab/interaction.hpp"
#include "nesslab/joint_basis.hpp"
#include "nesslab/models.hpp"

namespace nesslab {

struct BiasSpec {
  enum class Operator { total_current };

  double beta = 1.0;
  double lambda = 0.0;
  Operator op = Operator::total_current;

  void validate() const;
};

/// Density operator given by sector blocks in a joint eigenbasis. States
/// built here are diagonal; general blocks are accepted for verification.
class StationaryState {
 public:
  StationaryState(std::shared_ptr<const JointBasis> basis, std::vector<RealVector> probs);
  static StationaryState from_blocks(std::shared_ptr<const JointBasis> basis, std::vector<Matrix> rho);

  const JointBasis& basis() const { return *basis_; }
  std::shared_ptr<const JointBasis> basis_ptr() const { return basis_; }
  bool diagonal() const { return rho_.empty(); }
  /// Diagonal of the density in each sector.
  const std::vector<RealVector>& probs() const { return probs_; }
  /// Sector block of the density (diagonal states are expanded).
  Matrix block(int sector) const;

  double beta = 0.0;
  double lambda = 0.0;

 private:
  std::shared_ptr<const JointBasis> basis_;
  std::vector<RealVector> probs_;
  std::vector<Matrix> rho_;
};

/// Sum over the ring of translates of the current density.
OperatorSum total_current_sum(const Interaction& phi, const ChargeSpec& spec, const ChainConfig& chain);

/// ||[H_chain, J_tot]|| from the local commutators.
double bias_commutator_residual(const Interaction& phi, const ChargeSpec& spec, const ChainConfig& chain);

/// rho proportional to exp(-beta (H - lambda J_tot)).
StationaryState build_biased_gibbs(const Interaction& phi, const ChargeSpec& spec, const BiasSpec& bias,
                                   const ChainConfig& chain);

cd expectation(const StationaryState& state, const OperatorSum& a);
cd expectation(const StationaryState& state, const LocalOperator& a);
cd expectation(const StationaryState& state, const GlobalOperator& a);

struct VerificationReport {
  double stationarity_residual = 0.0;
  double translation_residual = 0.0;
  double current_value = 0.0;
  double current_imag = 0.0;
  double symmetry_residual = 0.0;
  double current_threshold = 1e-6;
  bool stationary = false;
  bool translation_invariant = false;
  bool is_ness = false;
};

VerificationReport verify_ness(const StationaryState& state, const Interaction& phi, const ChargeSpec& spec,
                               const CurrentGeometry& geom, double current_threshold = 1e-6);

/// {n_sites, site_dim, beta, lambda, current, residuals, spectrum}
std::string state_json(const StationaryState& state, const VerificationReport& report);

}  // namespace nesslab
