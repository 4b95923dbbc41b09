#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "nesslab/global_operator.hpp"
#include "nesslab/spectral.hpp"
#include "oracle.hpp"

using namespace nesslab;

namespace {

ChainConfig ring(int n) { return {n, 2, Boundary::periodic}; }

struct Fixture {
  Model model = build_xxz_model(0.0);
  StationaryState state;
  double current;

  Fixture(int n, double beta, double lambda)
      : state(build_biased_gibbs(model.phi, model.charge, make_bias(beta, lambda), ring(n))),
        current(expectation(state, current_density(model.phi, model.charge)).real()) {}

  static BiasSpec make_bias(double beta, double lambda) {
    BiasSpec b;
    b.beta = beta;
    b.lambda = lambda;
    return b;
  }
  LocalOperator n0() const { return LocalOperator::on_site(0, model.charge.n0); }
  LocalOperator h() const { return energy_density(model.phi).h; }
};

const Fixture& ring10() {
  static const Fixture f(10, 1.0, 0.5);
  return f;
}

const Fixture& ring10_unbiased() {
  static const Fixture f(10, 1.0, 0.0);
  return f;
}

constexpr double root2pi = 2.5066282746310002;

}  // namespace

TEST(Window, TransformMatchesQuadrature) {
  for (auto kind : {WindowFunction::Kind::hann, WindowFunction::Kind::truncated_gaussian}) {
    WindowFunction w;
    w.kind = kind;
    w.T = 2.0;
    for (double e : {0.0, 0.3, 1.7, 6.0}) {
      const double q =
          integrate([&](double t) { return w.value(t) * std::cos(e * t); }, -w.T, w.T, 1e-13).value / root2pi;
      EXPECT_NEAR(w.transform(e), q, 1e-11);
    }
  }
}

TEST(Window, InverseTransformRecoversWindow) {
  WindowFunction w;
  w.T = 2.0;
  for (double t : {0.0, 0.5, 1.3}) {
    const double back =
        integrate([&](double e) { return w.transform(e) * std::cos(e * t); }, -300.0, 300.0, 1e-10).value / root2pi;
    EXPECT_NEAR(back, w.value(t), 1e-6);
  }
}

TEST(Window, Validation) {
  WindowFunction w;
  w.T = 0.0;
  EXPECT_THROW(w.validate(), PreconditionError);
  EXPECT_EQ(window_kind_from_string("hann"), WindowFunction::Kind::hann);
  EXPECT_THROW(window_kind_from_string("boxcar"), ConfigError);
}

TEST(JointSpectrum, DenseRouteDiagonalizesBoth) {
  const ChainConfig c = ring(6);
  const Matrix h = chain_hamiltonian(build_xxz_model(0.3).phi, c);
  const Matrix t = shift_unitary(c);
  const DenseJointSpectrum js = joint_spectrum(h, t, c);
  const Matrix& v = js.vectors;
  EXPECT_LE((v.adjoint() * v - Matrix::Identity(64, 64)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((h * v - v * js.energies.cast<cd>().asDiagonal()).cwiseAbs().maxCoeff(), 1e-9);
  Vector phases(64);
  for (int i = 0; i < 64; ++i) phases(i) = std::polar(1.0, -2.0 * std::numbers::pi * js.m[static_cast<std::size_t>(i)] / 6.0);
  EXPECT_LE((t * v - v * phases.asDiagonal()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(JointSpectrum, ZeroHamiltonian) {
  const ChainConfig c = ring(4);
  const DenseJointSpectrum js = joint_spectrum(Matrix::Zero(16, 16), shift_unitary(c), c);
  EXPECT_LE(js.energies.cwiseAbs().maxCoeff(), 1e-12);
  for (int m : js.m) {
    EXPECT_GE(m, 0);
    EXPECT_LT(m, 4);
  }
}

TEST(Correlation, InitialValueIsCurrent) {
  const Fixture& f = ring10();
  const CurrentGeometry g{6, 3, 1, true};
  const CurrentCorrelator corr(f.state, f.model.phi, f.model.charge);
  const CorrelationFunction c = corr.correlation(g.L, g.M);
  EXPECT_NEAR(c.value(0.0), f.current, 1e-10);
  for (double t : {0.0, 0.4, 0.9}) EXPECT_LE(std::abs(c.complex_value(t).imag()), 1e-10);
}

TEST(Correlation, UnbiasedStateGivesZero) {
  const Fixture& f = ring10_unbiased();
  const CurrentGeometry g{6, 3, 1, true};
  for (double t : {0.0, 0.7}) EXPECT_LE(std::abs(correlation_C(f.state, f.model.phi, f.model.charge, g, t)), 1e-12);
}

TEST(Correlation, ForwardAndBackwardRoutesAgree) {
  const Fixture& f = ring10();
  const CurrentGeometry g{6, 3, 1, true};
  for (double t : {0.0, 0.3, 0.8}) {
    const double a = correlation_C(f.state, f.model.phi, f.model.charge, g, t);
    const double b = correlation_C_backward(f.state, f.model.phi, f.model.charge, g, t);
    EXPECT_NEAR(a, b, 1e-9) << t;
  }
}

TEST(Correlation, HorizonIsEnforced) {
  const Fixture& f = ring10();
  const CurrentGeometry g{6, 3, 1, true};
  const double h = wrap_horizon(f.model.phi, ring(10));
  EXPECT_NEAR(h, 2.5, 1e-12);
  EXPECT_THROW(correlation_C(f.state, f.model.phi, f.model.charge, g, h), PreconditionError);
}

TEST(Correlation, FlatWithinBound) {
  const Fixture& f = ring10();
  const CurrentGeometry g{6, 3, 1, true};
  const CurrentCorrelator corr(f.state, f.model.phi, f.model.charge);
  const auto rows = flatness_check(corr, f.model.phi, f.model.charge, g, ring(10), {0.0, 0.25, 0.5});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].deviation, 0.0, 1e-12);
  for (const auto& r : rows) EXPECT_TRUE(r.ok) << r.t << " " << r.deviation << " " << r.bound;
}

TEST(SumRule, QuadratureMatchesClosedForm) {
  const Fixture& f = ring10();
  const CurrentGeometry g{6, 3, 1, true};
  WindowFunction w;
  w.T = 2.0;
  const SumRuleResult r = sum_rule_check(f.state, f.model.phi, f.model.charge, g, w);
  EXPECT_NEAR(r.lhs, r.closed_form_lhs, 1e-8);
  EXPECT_NEAR(r.rhs, root2pi * f.current * w.transform(0.0), 1e-12);
  EXPECT_NEAR(r.c0, f.current, 1e-10);
  EXPECT_GT(r.panels, 0);
}

TEST(SumRule, UnbiasedStateIsTrivial) {
  const Fixture& f = ring10_unbiased();
  WindowFunction w;
  const SumRuleResult r = sum_rule_check(f.state, f.model.phi, f.model.charge, {6, 3, 1, true}, w);
  EXPECT_LE(std::abs(r.lhs), 1e-9);
  EXPECT_LE(std::abs(r.rhs), 1e-12);
}

TEST(SpectralFunction, MatchesDirectCorrelation) {
  const Fixture& f = ring10();
  const int n = 10;
  const ChainConfig c = ring(n);
  const SpectralFunction s = spectral_function_rho(f.state, f.n0(), f.h());
  EXPECT_LE(s.pairing_residual, 1e-10);

  const oracle::Mat rho =
      oracle::biased_gibbs(oracle::xxz_ring(n, 0.0), oracle::xx_total_current(n), 1.0, 0.5);
  const oracle::Mat ham = oracle::xxz_ring(n, 0.0);
  const oracle::Mat id = oracle::Mat::Identity(1 << n, 1 << n);
  oracle::Mat nd = oracle::at_site(f.model.charge.n0, 0, n);
  nd -= (rho * nd).trace() * id;
  for (int z : {0, 2, -3}) {
    oracle::Mat hd = embed(place_on_chain(shift(f.h(), -z), c), c);
    hd -= (rho * hd).trace() * id;
    for (double t : {0.0, 0.4}) {
      const cd direct = (rho * cd(0.0, 1.0) * nd * oracle::heisenberg(ham, hd, -t)).trace() /
                        (2.0 * std::numbers::pi * root2pi);
      EXPECT_NEAR(std::abs(s.rho(z, t) - direct), 0.0, 1e-9) << z << " " << t;
    }
  }
}

TEST(SpectralFunction, CompletenessByCovariance) {
  const Fixture& f = ring10();
  const SpectralFunction s = spectral_function_rho(f.state, f.n0(), f.h());
  const ChainConfig c = ring(10);
  const cd nh = expectation(f.state, Matrix(embed(place_on_chain(f.n0(), c), c) * embed(place_on_chain(f.h(), c), c)));
  const cd cov = nh - expectation(f.state, f.n0()) * expectation(f.state, f.h());
  EXPECT_NEAR(std::abs(s.table.total() - cd(0.0, 1.0) * cov), 0.0, 1e-10);
}

TEST(SpectralFunction, TracialStateIsReflectionSymmetric) {
  const Fixture& f = ring10_unbiased();
  const JointBasis& b = f.state.basis();
  std::vector<RealVector> probs;
  for (int q = 0; q < b.sector_count(); ++q) probs.push_back(RealVector::Constant(b.sector_size(q), 1.0 / 1024.0));
  const StationaryState tr(f.state.basis_ptr(), probs);
  const SpectralFunction s = spectral_function_rho(tr, f.n0(), f.n0());
  std::map<std::pair<int, long long>, cd> w;
  for (std::size_t i = 0; i < s.table.size(); ++i) w[{s.table.dm[i], std::llround(s.table.de[i] * 1e8)}] = s.table.weight[i];
  for (const auto& [key, val] : w) {
    const auto it = w.find({(10 - key.first) % 10, -key.second});
    ASSERT_NE(it, w.end());
    EXPECT_NEAR(std::abs(it->second - val), 0.0, 1e-12);
  }
}

TEST(SpectralFunction, RequiresDiagonalState) {
  const Fixture& f = ring10_unbiased();
  const JointBasis& b = f.state.basis();
  std::vector<Matrix> blocks;
  for (int q = 0; q < b.sector_count(); ++q) blocks.push_back(f.state.block(q));
  const StationaryState dense = StationaryState::from_blocks(f.state.basis_ptr(), blocks);
  EXPECT_THROW(spectral_function_rho(dense, f.n0(), f.h()), PreconditionError);
}

TEST(SpectralFunction, CsvHeader) {
  const SpectralFunction s = spectral_function_rho(ring10().state, ring10().n0(), ring10().h());
  const std::string csv = spectral_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "dk_index,dk_value,de_value,weight_re,weight_im");
}

TEST(MomentumDerivative, MomentTermMatchesTimeDomain) {
  const Fixture& f = ring10();
  const SpectralFunction s = spectral_function_rho(f.state, f.n0(), f.h());
  WindowFunction w;
  w.T = 2.0;
  for (int M : {1, 2, 3}) {
    const MomentTerms t = moment_terms(s, w, M);
    EXPECT_NEAR(t.moment, moment_term_time_domain(f.state, f.n0(), f.h(), w, M), 1e-9) << M;
  }
}

TEST(MomentumDerivative, CheckAndRejection) {
  const Fixture& f = ring10();
  const SpectralFunction s = spectral_function_rho(f.state, f.n0(), f.h());
  WindowFunction w;
  w.T = 2.0;
  const MomentumDerivativeResult r = momentum_derivative_check(s, w, 3, f.current, 0.0);
  EXPECT_NEAR(r.rhs, f.current * w.transform(0.0), 1e-14);
  EXPECT_LE(r.rel_err, 0.1);
  EXPECT_THROW(momentum_derivative_check(s, w, 3, f.current, 1e-3), PreconditionError);
  EXPECT_THROW(moment_terms(s, w, 5), PreconditionError);
}

TEST(MomentumDerivative, UnbiasedStateIsTrivial) {
  const Fixture& f = ring10_unbiased();
  const SpectralFunction s = spectral_function_rho(f.state, f.n0(), f.h());
  WindowFunction w;
  const MomentumDerivativeResult r = momentum_derivative_check(s, w, 3, f.current, 0.0);
  EXPECT_LE(std::abs(r.lhs), 1e-10);
  EXPECT_LE(std::abs(r.rhs), 1e-12);
}

TEST(Singularity, Profile) {
  const Fixture& f = ring10();
  const SpectralFunction s = spectral_function_rho(f.state, f.n0(), f.h());
  const double inf = std::numeric_limits<double>::infinity();
  const SingularityProfile p = singularity_diagnostic(s, {0.1, 1.0, inf});
  EXPECT_EQ(p.M, 4);
  EXPECT_FALSE(p.no_current);
  EXPECT_NEAR(p.fraction.back(), 1.0, 1e-12);
  EXPECT_THROW(singularity_diagnostic(s, {0.1}, 5), PreconditionError);
}

TEST(Singularity, NoCurrent) {
  const Fixture& f = ring10_unbiased();
  const SingularityProfile p = singularity_diagnostic(spectral_function_rho(f.state, f.n0(), f.h()), {0.1, 1.0});
  EXPECT_TRUE(p.no_current);
  for (double v : p.fraction) EXPECT_TRUE(std::isnan(v));
}
