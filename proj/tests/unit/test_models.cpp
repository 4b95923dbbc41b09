#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nesslab/global_operator.hpp"
#include "nesslab/models.hpp"
#include "oracle.hpp"

using namespace nesslab;

namespace {

ChainConfig ring(int n) { return {n, 2, Boundary::periodic}; }

double diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Jordan-Wigner annihilator on an n-site chain, 0 = empty.
oracle::Mat jw_c(int x, int n) {
  oracle::Mat a = oracle::Mat::Zero(2, 2);
  a(0, 1) = 1.0;
  oracle::Mat out = oracle::at_site(a, x, n);
  for (int y = 0; y < x; ++y) out = oracle::at_site(oracle::pauli(3), y, n) * out;
  return out;
}

Interaction random_interaction(int r, std::mt19937_64& rng) {
  Interaction phi(2, r);
  phi.add_term({0}, oracle::random_hermitian(2, rng));
  phi.add_term({0, 1}, oracle::random_hermitian(4, rng));
  if (r >= 2) phi.add_term({0, 2}, oracle::random_hermitian(4, rng));
  if (r >= 2) phi.add_term({0, 1, 2}, oracle::random_hermitian(8, rng));
  if (r >= 3) phi.add_term({0, 3}, oracle::random_hermitian(4, rng));
  if (r >= 3) phi.add_term({0, 2, 3}, oracle::random_hermitian(8, rng));
  return phi;
}

// Conserving interaction of range r: density couplings plus XX hopping.
Model random_conserving(int r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Interaction phi(2, r);
  const Matrix xx = oracle::kron(oracle::spin(1), oracle::spin(1)) + oracle::kron(oracle::spin(2), oracle::spin(2));
  const Matrix zz = oracle::kron(oracle::spin(3), oracle::spin(3));
  phi.add_term({0}, u(rng) * oracle::spin(3));
  phi.add_term({0, 1}, u(rng) * xx + u(rng) * zz);
  for (int s = 2; s <= r; ++s) phi.add_term({0, s}, u(rng) * zz);
  return {std::move(phi), ChargeSpec{oracle::spin(3)}};
}

}  // namespace

TEST(Interaction, RejectsBadTerms) {
  Interaction phi(2, 1);
  EXPECT_THROW(phi.add_term({0, 2}, Matrix::Identity(4, 4)), PreconditionError);
  EXPECT_THROW(phi.add_term({1, 2}, Matrix::Identity(4, 4)), PreconditionError);
  Matrix nh = Matrix::Zero(4, 4);
  nh(0, 1) = 1.0;
  EXPECT_THROW(phi.add_term({0, 1}, nh), PreconditionError);
}

TEST(Interaction, SerializationRoundTripsBitExactly) {
  std::mt19937_64 rng(21);
  const Interaction phi = random_interaction(3, rng);
  const ChargeSpec spec{oracle::spin(3)};
  const std::string text = serialize(phi, spec);
  const auto [back, bspec] = deserialize_model(text);
  ASSERT_EQ(back.terms().size(), phi.terms().size());
  for (std::size_t c = 0; c < phi.terms().size(); ++c) {
    EXPECT_EQ(back.terms()[c].offsets, phi.terms()[c].offsets);
    EXPECT_TRUE((back.terms()[c].matrix.array() == phi.terms()[c].matrix.array()).all());
  }
  EXPECT_EQ(back.range(), 3);
  EXPECT_EQ(serialize(back, bspec), text);
  EXPECT_THROW(deserialize_model("{\"site_dim\": 2}"), ConfigError);
}

TEST(LocalHamiltonian, XXExamples) {
  const Model m = build_xxz_model(0.0);
  const ChainConfig c = ring(4);
  EXPECT_LE(local_hamiltonian(m.phi, 0, 0, c).cwiseAbs().maxCoeff(), 0.0);
  const Matrix ref = oracle::at_site(oracle::spin(1), 0, 4) * oracle::at_site(oracle::spin(1), 1, 4) +
                     oracle::at_site(oracle::spin(2), 0, 4) * oracle::at_site(oracle::spin(2), 1, 4);
  EXPECT_LE(diff(local_hamiltonian(m.phi, 0, 1, c), ref), 1e-15);
  EXPECT_LE(diff(chain_hamiltonian(m.phi, ring(6)), oracle::xxz_ring(6, 0.0)), 1e-14);
}

TEST(LocalHamiltonian, NestedWindowsDifferByOutsideTerms) {
  std::mt19937_64 rng(5);
  const Interaction phi = random_interaction(2, rng);
  const ChainConfig c = ring(8);
  const Matrix diffop = local_hamiltonian(phi, 0, 5, c) - local_hamiltonian(phi, 1, 4, c);
  // term-set enumeration: translates inside [0,5] but not inside [1,4]
  Matrix expect = Matrix::Zero(256, 256);
  for (std::size_t t = 0; t < phi.terms().size(); ++t)
    for (int y = 0; y <= 5; ++y) {
      const int last = y + phi.terms()[t].offsets.back();
      if (last > 5) continue;
      if (y >= 1 && last <= 4) continue;
      expect += embed(phi.placed(t, y), c);
    }
  EXPECT_LE(diff(diffop, expect), 1e-12);
}

TEST(ChargeOperator, Examples) {
  const Model m = build_xxz_model(1.0);
  const ChainConfig c = ring(6);
  EXPECT_LE(diff(charge_operator(m.charge, 2, 2, c), oracle::at_site(oracle::spin(3), 2, 6)), 0.0);
  const Matrix n = charge_operator(m.charge, 0, 5, c);
  Eigen::SelfAdjointEigenSolver<Matrix> es(n);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()(i);
    EXPECT_NEAR(v, std::round(v), 1e-12);
    EXPECT_LE(std::abs(v), 3.0 + 1e-12);
  }
  EXPECT_NEAR(es.eigenvalues()(0), -3.0, 1e-12);
  EXPECT_LE(diff(charge_operator(m.charge, 0, 4, c), charge_operator(m.charge, 0, 1, c) + charge_operator(m.charge, 2, 4, c)), 1e-15);
  const GlobalOperator t = shift_unitary(c);
  EXPECT_LE(diff(t * charge_operator(m.charge, 1, 3, c) * t.adjoint(), charge_operator(m.charge, 2, 4, c)), 1e-14);
}

TEST(Conservation, BuiltInModelsConserveCharge) {
  const ChainConfig c = ring(10);
  for (double lam : {0.0, 0.5, 1.0}) EXPECT_LE(check_conservation(build_xxz_model(lam).phi, build_xxz_model(lam).charge, c), 1e-12);
  const std::vector<double> v{0.5};
  const Model f = build_fermion_model(1.0, v);
  EXPECT_LE(check_conservation(f.phi, f.charge, c), 1e-12);
  const std::vector<double> v1{1.0};
  const Model g = build_fermion_model(0.0, v1);
  EXPECT_EQ(check_conservation(g.phi, g.charge, c), 0.0);
}

TEST(Conservation, NonConservingInteractionIsReported) {
  Interaction phi(2, 1);
  phi.add_term({0}, oracle::pauli(1));
  const ChargeSpec spec{oracle::pauli(3)};
  // [sigma3, sigma1] = 2i sigma2 on each site; the full ring of 6 dominates
  EXPECT_NEAR(check_conservation(phi, spec, ring(6), 4), 2.0 * 6.0, 1e-12);
  EXPECT_NEAR(check_conservation(phi, spec, ChainConfig{6, 2, Boundary::open}, 4), 2.0 * 4.0, 1e-12);
}

TEST(XXZ, TermNormAndTotalCurrent) {
  const Model iso = build_xxz_model(1.0);
  EXPECT_NEAR(iso.phi.placed(0, 0).norm(), 0.75, 1e-14);
  for (int n : {6, 8}) {
    const ChainConfig c = ring(n);
    const Matrix h = chain_hamiltonian(build_xxz_model(0.0).phi, c);
    const Matrix j = oracle::xx_total_current(n);
    EXPECT_LE(comm_norm(h, j), 1e-12);
  }
  const Matrix h1 = oracle::xxz_ring(6, 1.0);
  EXPECT_GT(comm_norm(h1, oracle::xx_total_current(6)), 1e-3);
}

TEST(Current, XXClosedForm) {
  const Model m = build_xxz_model(0.0);
  const LocalOperator j0 = current_density(m.phi, m.charge);
  const LocalOperator ref = -1.0 * LocalOperator::product({{0, spin::s(2)}, {1, spin::s(1)}}) +
                            LocalOperator::product({{0, spin::s(1)}, {1, spin::s(2)}});
  EXPECT_EQ(j0.support(), (std::vector<int>{0, 1}));
  EXPECT_LE(max_abs_diff(j0, ref), 1e-12);
  EXPECT_LE((j0.coeffs() - oracle::kron(oracle::spin(2), oracle::spin(1)) + oracle::kron(oracle::spin(1), oracle::spin(2))).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Current, FermionClosedForm) {
  const double t = 0.7;
  const std::vector<double> v{0.5};
  const Model m = build_fermion_model(t, v);
  const ChainConfig c = ring(4);
  const LocalOperator j0 = current_density(m.phi, m.charge);
  const oracle::Mat c0 = jw_c(0, 4), c1 = jw_c(1, 4);
  const oracle::Mat ref = oracle::cd(0.0, t) * (c1.adjoint() * c0 - c0.adjoint() * c1);
  EXPECT_LE(diff(embed(j0, c), ref), 1e-12);
}

TEST(Current, FermionHoppingMatchesJordanWigner) {
  const std::vector<double> v{0.5, 0.25};
  const Model m = build_fermion_model(1.0, v);
  const int n = 6;
  const ChainConfig c{n, 2, Boundary::open};
  oracle::Mat h = oracle::Mat::Zero(64, 64);
  for (int x = 0; x + 1 < n; ++x) {
    h += -(jw_c(x + 1, n).adjoint() * jw_c(x, n) + jw_c(x, n).adjoint() * jw_c(x + 1, n));
    h += 0.5 * jw_c(x, n).adjoint() * jw_c(x, n) * jw_c(x + 1, n).adjoint() * jw_c(x + 1, n);
  }
  for (int x = 0; x + 2 < n; ++x) h += 0.25 * jw_c(x, n).adjoint() * jw_c(x, n) * jw_c(x + 2, n).adjoint() * jw_c(x + 2, n);
  EXPECT_LE(diff(local_hamiltonian(m.phi, 0, n - 1, c), h), 1e-12);
}

TEST(Current, TrivialFermion) {
  const std::vector<double> v{0.0};
  const Model m = build_fermion_model(0.0, v);
  EXPECT_LE(current_density(m.phi, m.charge).max_abs(), 0.0);
  EXPECT_LE(window_hamiltonian(m.phi, 0, 5).max_abs(), 0.0);
}

TEST(Current, IndependentOfGeometry) {
  ChainConfig c{20, 2, Boundary::periodic};
  c.dim_cap = std::uint64_t{1} << 20;
  for (const Model& m : {build_xxz_model(0.0), build_xxz_model(0.5)}) {
    const LocalOperator a = current_operator(m.phi, m.charge, {7, 3, 1, true}, c);
    const LocalOperator b = current_operator(m.phi, m.charge, {9, 4, 1, true}, c);
    EXPECT_LE(max_abs_diff(a, b), 1e-12);
    EXPECT_LE(max_abs_diff(a, current_density(m.phi, m.charge)), 1e-12);
  }
  std::mt19937_64 rng(8);
  const Model r2 = random_conserving(2, rng);
  const LocalOperator a = current_operator(r2.phi, r2.charge, {11, 5, 2, true}, c);
  const LocalOperator b = current_operator(r2.phi, r2.charge, {13, 6, 2, false}, c);
  EXPECT_LE(max_abs_diff(a, b), 1e-12);
  EXPECT_GE(a.min_site(), -r2.phi.range() + 1);
  EXPECT_LE(a.max_site(), r2.phi.range());
}

TEST(Current, MatchesDenseCommutatorOnRing) {
  const Model m = build_xxz_model(0.3);
  const ChainConfig c = ring(10);
  const CurrentGeometry g{6, 3, 1, true};
  const Matrix n = charge_operator(m.charge, -6, 0, c);
  const Matrix h = local_hamiltonian(m.phi, -3, 3, c);
  const Matrix dense = oracle::cd(0.0, 1.0) * (n * h - h * n);
  EXPECT_LE(diff(embed(place_on_chain(current_operator(m.phi, m.charge, g, c), c), c), dense), 1e-12);
}

TEST(Geometry, Validation) {
  const ChainConfig c = ring(12);
  EXPECT_NO_THROW((CurrentGeometry{7, 3, 1, true}.validate(c)));
  EXPECT_THROW((CurrentGeometry{5, 3, 1, true}.validate(c)), PreconditionError);
  EXPECT_THROW((CurrentGeometry{7, 2, 1, true}.validate(c)), PreconditionError);
  EXPECT_THROW((CurrentGeometry{9, 3, 1, true}.validate(c)), PreconditionError);
  EXPECT_NO_THROW((CurrentGeometry{4, 2, 1, false}.validate(c)));
  EXPECT_THROW((CurrentGeometry{1, 2, 1, false}.validate(c)), PreconditionError);
}

TEST(EnergyCurrents, DefiningIdentityAndSupports) {
  std::mt19937_64 rng(13);
  for (int r : {1, 2}) {
    const Model m = r == 1 ? build_xxz_model(0.4) : random_conserving(2, rng);
    const ChainConfig c = ring(12);
    const int M = r == 1 ? 3 : 2;
    const EnergyCurrents ec = energy_current_operators(m.phi, M, c);
    const LocalOperator lhs =
        I * commutator(window_hamiltonian(m.phi, -M, M), window_hamiltonian(m.phi, -M - r, M + r));
    EXPECT_LE(max_abs_diff(lhs, ec.plus - ec.minus), 1e-12);
    EXPECT_GE(ec.plus.min_site(), M - 2 * r + 1);
    EXPECT_LE(ec.plus.max_site(), M + r);
    EXPECT_GE(ec.minus.min_site(), -M - r);
    EXPECT_LE(ec.minus.max_site(), -M + 2 * r - 1);
  }
  const Model xx = build_xxz_model(0.0);
  const EnergyCurrents ec = energy_current_operators(xx.phi, 3, ring(12));
  const LocalOperator reflected = relabel(ec.plus, [](int s) { return -s; });
  EXPECT_LE(max_abs_diff(reflected, -1.0 * ec.minus), 1e-12);
}

TEST(EnergyCurrents, CommuteWithChargeWindow) {
  const Model m = build_xxz_model(0.6);
  const int M = 3, L = 7;
  const EnergyCurrents ec = energy_current_operators(m.phi, M, ring(12));
  const LocalOperator n = window_charge(m.charge, -L, 0, 2);
  EXPECT_LE(commutator(n, ec.plus).norm(), 1e-12);
  EXPECT_LE(commutator(n, ec.minus).norm(), 1e-12);
}

TEST(Symmetry, ChargeRotationLeavesHamiltonianInvariant) {
  const ChainConfig c = ring(8);
  const std::vector<double> v{0.5};
  for (const Model& m : {build_xxz_model(0.0), build_xxz_model(1.0), build_fermion_model(1.0, v)}) {
    const Matrix n = charge_operator(m.charge, 0, 7, c);
    Eigen::SelfAdjointEigenSolver<Matrix> es(n);
    Eigen::VectorXcd ph(n.rows());
    for (Eigen::Index i = 0; i < n.rows(); ++i) ph(i) = std::polar(1.0, 0.73 * es.eigenvalues()(i));
    const Matrix ut = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    const Matrix h = chain_hamiltonian(m.phi, c);
    EXPECT_LE(diff(ut * h * ut.adjoint(), h), 1e-12);
  }
}

TEST(EnergyDensity, Examples) {
  const EnergyDensity xx = energy_density(build_xxz_model(0.0).phi);
  const LocalOperator ref = LocalOperator::product({{0, spin::s(1)}, {1, spin::s(1)}}) +
                            LocalOperator::product({{0, spin::s(2)}, {1, spin::s(2)}});
  EXPECT_LE(max_abs_diff(xx.h, ref), 1e-14);
  EXPECT_LE(xx.phi_s[0].max_abs(), 1e-15);
  Interaction onsite(2, 1);
  onsite.add_term({0}, oracle::pauli(3));
  const EnergyDensity e = energy_density(onsite);
  EXPECT_LE(max_abs_diff(e.h, LocalOperator::on_site(0, oracle::pauli(3))), 1e-14);
  const BoundaryTerms bt = boundary_terms(onsite, 4);
  // the translate sum over [-M+r, M-r] misses the two end sites
  EXPECT_LE(max_abs_diff(bt.c_minus, LocalOperator::on_site(-4, oracle::pauli(3))), 1e-14);
  EXPECT_LE(max_abs_diff(bt.c_plus, LocalOperator::on_site(4, oracle::pauli(3))), 1e-14);
}

TEST(EnergyDensity, TelescopingReconstructsWindowHamiltonian) {
  std::mt19937_64 rng(17);
  for (int r : {1, 2, 3}) {
    const Interaction phi = random_interaction(r, rng);
    const int M = 4;
    const EnergyDensity ed = energy_density(phi);
    const BoundaryTerms bt = boundary_terms(phi, M);
    LocalOperator sum = bt.c_minus + bt.c_plus;
    for (int y = -M + r; y <= M - r; ++y) sum += shift(ed.h, y);
    EXPECT_LE(max_abs_diff(sum, window_hamiltonian(phi, -M, M)), 1e-12) << "r = " << r;
    EXPECT_GE(bt.c_minus.min_site(), -M);
    EXPECT_LE(bt.c_minus.max_site(), -M + 2 * r);
    EXPECT_GE(bt.c_plus.min_site(), M - 2 * r);
    EXPECT_LE(bt.c_plus.max_site(), M);
    for (std::size_t s = static_cast<std::size_t>(r) + 1; s < ed.phi_s.size(); ++s) EXPECT_LE(ed.phi_s[s].max_abs(), 1e-12);
  }
}

TEST(EnergyDensity, DenseReconstructionXXZ) {
  const Model m = build_xxz_model(0.5);
  const ChainConfig c = ring(12);
  const int M = 4;
  const EnergyDensity ed = energy_density(m.phi);
  const BoundaryTerms bt = boundary_terms(m.phi, M);
  OperatorSum sum(c);
  for (int y = -M + 1; y <= M - 1; ++y) sum.add(place_on_chain(shift(ed.h, y), c));
  sum.add(place_on_chain(bt.c_minus, c));
  sum.add(place_on_chain(bt.c_plus, c));
  OperatorSum neg(c);
  neg.add(place_on_chain(-1.0 * window_hamiltonian(m.phi, -M, M), c));
  const auto sectors = ChargeSectors::build(c, m.charge.n0);
  SectorMatrix a = SectorMatrix::from_sum(sum, sectors), b = SectorMatrix::from_sum(neg, sectors);
  double worst = 0.0;
  for (auto& [k, blk] : a.blocks) worst = std::max(worst, (blk + b.blocks.at(k)).cwiseAbs().maxCoeff());
  EXPECT_LE(worst, 1e-12);
}

TEST(Velocity, Examples) {
  Interaction zero(2, 1);
  EXPECT_EQ(lr_velocity(zero), 0.0);
  EXPECT_NEAR(lr_velocity(build_xxz_model(0.0).phi), 32.0 * std::numbers::e, 1e-12);
  Interaction onsite(2, 1);
  onsite.add_term({0}, oracle::pauli(3));
  EXPECT_NEAR(lr_velocity(onsite), 4.0 * std::numbers::e, 1e-12);
}
