#pragma once

#include <string>
#include <vector>

#include "nesslab/dynamics.hpp"
#include "nesslab/models.hpp"
#include "nesslab/steady_state.hpp"
#include "nesslab/window.hpp"

namespace nesslab {

/// Complex weights on (momentum transfer, energy transfer) pairs. The
/// momentum transfer is stored as an integer dm with dk = 2 pi dm / n.
struct PairTable {
  int n_sites = 0;
  std::vector<int> dm;
  std::vector<double> de;
  std::vector<cd> weight;

  std::size_t size() const { return weight.size(); }
  double dk(std::size_t i) const;
  cd total() const;
};

/// w(dm, de) = sum over pairs (n, m) of i (p_n - p_m) A_nm B_mn, grouped by
/// (k_m - k_n, E_m - E_n); the spectral weights of <i[A, B(t)]>.
PairTable commutator_table(const StationaryState& state, const OperatorSum& a, const OperatorSum& b);

/// w(dm, de) = sum over pairs of i p_n A_nm B_mn.
PairTable product_table(const StationaryState& state, const OperatorSum& a, const OperatorSum& b);

/// Trigonometric polynomial sum_j a_j e^{i w_j t} with distinct frequencies.
struct CorrelationFunction {
  std::vector<double> freqs;
  std::vector<cd> amps;

  cd complex_value(double t) const;
  double value(double t) const { return complex_value(t).real(); }
  /// int f(t) C(t) dt in closed form through the window transform.
  double windowed_integral(const WindowFunction& w) const;
};

/// C(t) = <i[N^_[-L,0], H^_[-M,M](t)]> for any geometry from one set of
/// tables built per canonical interaction term.
class CurrentCorrelator {
 public:
  CurrentCorrelator(const StationaryState& state, const Interaction& phi, const ChargeSpec& spec);

  CorrelationFunction correlation(int L, int M) const;
  const StationaryState& state() const { return *state_; }

 private:
  const StationaryState* state_;
  const Interaction* phi_;
  std::vector<PairTable> tables_;  // one per canonical term, n_0 on the left
};

/// Largest time for which |x| + 2 v |t| < n_sites holds at x = 0.
double wrap_horizon(const Interaction& phi, const ChainConfig& chain, double v_emp = 0.0);

double correlation_C(const StationaryState& state, const Interaction& phi, const ChargeSpec& spec,
                     const CurrentGeometry& geom, double t, double v_emp = 0.0);

/// Same quantity with the window operators transformed directly and the
/// charge evolved backward in time.
double correlation_C_backward(const StationaryState& state, const Interaction& phi, const ChargeSpec& spec,
                              const CurrentGeometry& geom, double t);

struct SumRuleResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double quadrature_error = 0.0;
  double closed_form_lhs = 0.0;
  double c0 = 0.0;       // C(0)
  double current = 0.0;  // omega(j_0)
  int panels = 0;
};

SumRuleResult sum_rule_check(const StationaryState& state, const Interaction& phi, const ChargeSpec& spec,
                             const CurrentGeometry& geom, const WindowFunction& window, double v_emp = 0.0);
SumRuleResult sum_rule_check(const CurrentCorrelator& corr, const CurrentGeometry& geom, const WindowFunction& window,
                             double current, const ChainConfig& chain, double horizon);

struct FlatnessRow {
  double t = 0.0;
  double c = 0.0;
  double deviation = 0.0;
  double bound = 0.0;
  bool ok = true;
};

/// |C(t) - C(0)| against Z_{M,L}(t) with the norms measured from the
/// constructed operators.
std::vector<FlatnessRow> flatness_check(const CurrentCorrelator& corr, const Interaction& phi, const ChargeSpec& spec,
                                        const CurrentGeometry& geom, const ChainConfig& chain,
                                        const std::vector<double>& times);
DeviationNorms measured_norms(const Interaction& phi, const ChargeSpec& spec, const CurrentGeometry& geom,
                              const ChainConfig& chain);

/// Discrete surrogate of the charge / energy-density spectral function.
struct SpectralFunction {
  PairTable table;
  std::string state_id;
  std::string left_id;
  std::string right_id;
  double pairing_residual = 0.0;  // max |w_BA + conj(w_AB)|

  /// (1 / (2 pi sqrt(2 pi))) sum w e^{i(dk z - de t)}
  cd rho(int z, double t) const;
};

/// Weights of <i n^ E(dk de) h^> with hats taken in the state.
SpectralFunction spectral_function_rho(const StationaryState& state, const LocalOperator& n, const LocalOperator& h,
                                       std::string state_id = "state", std::string left_id = "n",
                                       std::string right_id = "h");

std::string spectral_csv(const SpectralFunction& s);

/// Integrated window terms of the position-moment decomposition, in the
/// units of int f(t) C(t) dt.
struct MomentTerms {
  int M = 0;
  double outer = 0.0;   // (2M+1) sum over the ring outside [-M, M]
  double window = 0.0;  // (M+1) sum over [-M, M]
  double moment = 0.0;  // -sum_{|z|<=M} z
};

MomentTerms moment_terms(const SpectralFunction& s, const WindowFunction& window, int M);

struct MomentumDerivativeResult {
  int M = 0;
  double lhs = 0.0;  // integrated momentum derivative
  double rhs = 0.0;  // omega(j_0) f~(0)
  double abs_err = 0.0;
  double rel_err = 0.0;
  double symmetry_residual = 0.0;
  MomentTerms terms;
};

/// Requires symmetry_residual <= 1e-10; the symmetry-breaking branch is
/// rejected.
MomentumDerivativeResult momentum_derivative_check(const SpectralFunction& s, const WindowFunction& window, int M,
                                                   double current, double symmetry_residual);

/// sum_{|d| <= M} d int f(t) <i[n^_0, h^_d(t)]> dt by quadrature of the
/// commutator table; an independent route to the moment term.
double moment_term_time_domain(const StationaryState& state, const LocalOperator& n, const LocalOperator& h,
                               const WindowFunction& window, int M);

struct SingularityProfile {
  int M = 0;
  std::vector<double> eps;
  std::vector<double> fraction;  // NaN when there is no current
  double total = 0.0;
  bool no_current = false;
};

/// Fraction of the position-weighted (k ~ 0) mass carried by |de| < eps.
/// M <= 0 selects the largest symmetric window on the ring.
SingularityProfile singularity_diagnostic(const SpectralFunction& s, const std::vector<double>& eps_windows, int M = 0);

std::string derivative_json(const MomentumDerivativeResult& r);
std::string singularity_json(const SingularityProfile& p);

}  // namespace nesslab
