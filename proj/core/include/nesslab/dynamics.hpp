#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nesslab/chain.hpp"
#include "nesslab/interaction.hpp"
#include "nesslab/joint_basis.hpp"
#include "nesslab/local_operator.hpp"

namespace nesslab {

/// Dense eigendecomposition of a Hamiltonian; eigenvalues ascending.
struct EvolutionContext {
  RealVector eigenvalues;
  Matrix eigenvectors;
  ChainConfig chain;

  static EvolutionContext from_dense(const GlobalOperator& h, const ChainConfig& chain);
  static EvolutionContext from_basis(const JointBasis& basis);

  /// ||U D U^dagger - H|| / ||H||, entrywise max.
  double reconstruction_residual(const GlobalOperator& h) const;
};

/// e^{iHt} A e^{-iHt}
GlobalOperator evolve(const GlobalOperator& a, const EvolutionContext& ctx, double t);

struct LRBoundParams {
  int d1 = 1;  // site span of the first support
  int d2 = 1;
  int x = 0;
  double norm_a = 1.0;
  double norm_b = 1.0;
  double velocity = 0.0;
  int site_dim = 2;

  void validate() const;
};

/// 2 (N+1)^{d1+d2} |A| |B| d1 d2 exp(-(|x| - d1 - d2) + 2 V |t|)
double lr_bound(const LRBoundParams& p, double t);

/// Number of sites from the first to the last support site.
int site_span(const LocalOperator& op);

struct LRScanRow {
  int x = 0;
  double t = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  bool excluded = false;
};

struct LRScanOptions {
  /// Empirical velocity for the wrap horizon; <= 0 selects
  /// 4 * max term norm * r.
  double v_emp = 0.0;
  /// Diagonal single-site charge used to split the basis into sectors.
  std::optional<Matrix> charge;
};

struct LRScanResult {
  std::vector<LRScanRow> rows;
  double velocity = 0.0;
  double v_emp = 0.0;
  int violations = 0;
  int excluded = 0;
};

double default_empirical_velocity(const Interaction& phi);

/// ||[tau_x alpha_t(A), B]|| against the bound over a grid. Points whose
/// light cone wraps (|x| + 2 v_emp |t| >= n_sites) or with |x| <= d1 + d2
/// are excluded.
LRScanResult lr_scan(const Interaction& phi, const LocalOperator& a, const LocalOperator& b,
                     const std::vector<int>& x_values, const std::vector<double>& t_values, const ChainConfig& chain,
                     const LRScanOptions& options = {});

/// Same scan reusing an existing eigenbasis of the chain Hamiltonian.
LRScanResult lr_scan(const JointBasis& basis, const Interaction& phi, const LocalOperator& a, const LocalOperator& b,
                     const std::vector<int>& x_values, const std::vector<double>& t_values,
                     const LRScanOptions& options = {});

std::string lr_scan_csv(const LRScanResult& result);

struct DeviationNorms {
  double n = 0.0;   // ||n_0||
  double J = 0.0;   // ||J_+||
  double j = 0.0;   // ||j_0||
  double J0 = 0.0;  // ||J_-||
};

/// Z_{M,L}(t) with V = lr_velocity(phi).
double deviation_bound_Z(const Interaction& phi, int M, int L, double t, const DeviationNorms& norms);
double deviation_bound_Z(double velocity, int range, int site_dim, int M, int L, double t, const DeviationNorms& norms);

}  // namespace nesslab
