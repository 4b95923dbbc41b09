#include "nesslab/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "nesslab/global_operator.hpp"

namespace nesslab {

void BiasSpec::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw PreconditionError("beta must be finite and positive");
  if (!std::isfinite(lambda)) throw PreconditionError("lambda must be finite");
}

StationaryState::StationaryState(std::shared_ptr<const JointBasis> basis, std::vector<RealVector> probs)
    : basis_(std::move(basis)), probs_(std::move(probs)) {
  if (static_cast<int>(probs_.size()) != basis_->sector_count()) throw PreconditionError("one probability vector per sector");
  double total = 0.0;
  for (int q = 0; q < basis_->sector_count(); ++q) {
    const RealVector& p = probs_[static_cast<std::size_t>(q)];
    if (p.size() != basis_->sector_size(q)) throw PreconditionError("probability vector has the wrong length");
    if (p.size() > 0 && p.minCoeff() < 0.0) throw PreconditionError("negative probability");
    total += p.sum();
  }
  if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("probabilities do not sum to one");
}

StationaryState StationaryState::from_blocks(std::shared_ptr<const JointBasis> basis, std::vector<Matrix> rho) {
  if (static_cast<int>(rho.size()) != basis->sector_count()) throw PreconditionError("one density block per sector");
  std::vector<RealVector> probs;
  double trace = 0.0;
  for (int q = 0; q < basis->sector_count(); ++q) {
    const Matrix& r = rho[static_cast<std::size_t>(q)];
    if (r.rows() != basis->sector_size(q) || r.cols() != basis->sector_size(q))
      throw PreconditionError("density block has the wrong size");
    if ((r - r.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw PreconditionError("density block is not Hermitian");
    if (r.rows() > 0 && r.diagonal().real().minCoeff() < -1e-14) throw PreconditionError("density block is not positive");
    probs.push_back(r.diagonal().real().cwiseMax(0.0));
    trace += r.trace().real();
  }
  if (std::abs(trace - 1.0) > 1e-12) throw PreconditionError("density does not have unit trace");
  StationaryState s(std::move(basis), std::move(probs));
  s.rho_ = std::move(rho);
  return s;
}

Matrix StationaryState::block(int sector) const {
  if (!rho_.empty()) return rho_[static_cast<std::size_t>(sector)];
  return probs_[static_cast<std::size_t>(sector)].cast<cd>().asDiagonal();
}

OperatorSum total_current_sum(const Interaction& phi, const ChargeSpec& spec, const ChainConfig& chain) {
  if (!chain.periodic()) throw PreconditionError("total current needs a periodic chain");
  const LocalOperator j0 = current_density(phi, spec);
  OperatorSum out(chain);
  for (int x = 0; x < chain.n_sites; ++x) out.add(place_on_chain(shift(j0, x), chain));
  return out;
}

double bias_commutator_residual(const Interaction& phi, const ChargeSpec& spec, const ChainConfig& chain) {
  if (!chain.periodic()) throw PreconditionError("total current needs a periodic chain");
  const LocalOperator j0 = current_density(phi, spec);
  std::vector<LocalOperator> js, hs;
  for (int x = 0; x < chain.n_sites; ++x) js.push_back(place_on_chain(shift(j0, x), chain));
  for (std::size_t c = 0; c < phi.terms().size(); ++c)
    for (int y = 0; y < chain.n_sites; ++y) hs.push_back(place_on_chain(phi.placed(c, y), chain));
  OperatorSum comm(chain);
  for (const auto& h : hs)
    for (const auto& j : js) {
      std::vector<int> common;
      std::set_intersection(h.support().begin(), h.support().end(), j.support().begin(), j.support().end(),
                            std::back_inserter(common));
      if (!common.empty()) comm.add(commutator(h, j));
    }
  const auto sectors = ChargeSectors::build(chain, spec.diagonal() ? std::optional<Matrix>(spec.n0) : std::nullopt);
  return SectorMatrix::from_sum(comm, sectors).norm();
}

StationaryState build_biased_gibbs(const Interaction& phi, const ChargeSpec& spec, const BiasSpec& bias,
                                   const ChainConfig& chain) {
  chain.validate();
  bias.validate();
  if (!chain.periodic()) throw PreconditionError("stationary states are built on periodic chains");
  const double residual = bias_commutator_residual(phi, spec, chain);
  if (residual > 1e-10)
    throw PreconditionError("bias operator does not commute with the Hamiltonian (residual " + std::to_string(residual) + ")");
  const OperatorSum h = chain_hamiltonian_sum(phi, chain);
  const OperatorSum j = total_current_sum(phi, spec, chain);
  auto basis = std::make_shared<const JointBasis>(
      JointBasis::build(h, spec.diagonal() ? std::optional<Matrix>(spec.n0) : std::nullopt, &j));
  double amax = -std::numeric_limits<double>::infinity();
  for (int q = 0; q < basis->sector_count(); ++q)
    for (const auto& l : basis->labels(q)) amax = std::max(amax, -bias.beta * (l.energy - bias.lambda * l.bias));
  std::vector<RealVector> probs;
  double z = 0.0;
  for (int q = 0; q < basis->sector_count(); ++q) {
    const auto& labels = basis->labels(q);
    RealVector p(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i)
      p(static_cast<Eigen::Index>(i)) = std::exp(-bias.beta * (labels[i].energy - bias.lambda * labels[i].bias) - amax);
    z += p.sum();
    probs.push_back(std::move(p));
  }
  for (auto& p : probs) p /= z;
  StationaryState state(std::move(basis), std::move(probs));
  state.beta = bias.beta;
  state.lambda = bias.lambda;
  return state;
}

cd expectation(const StationaryState& state, const OperatorSum& a) {
  const JointBasis& basis = state.basis();
  cd acc = 0.0;
  for (int q = 0; q < basis.sector_count(); ++q) {
    const Matrix aq = basis.transform(a, q, q);
    if (state.diagonal())
      acc += (state.probs()[static_cast<std::size_t>(q)].cast<cd>().array() * aq.diagonal().array()).sum();
    else
      acc += (state.block(q).transpose().array() * aq.array()).sum();
  }
  return acc;
}

cd expectation(const StationaryState& state, const LocalOperator& a) {
  OperatorSum sum(state.basis().chain());
  sum.add(place_on_chain(a, state.basis().chain()));
  return expectation(state, sum);
}

cd expectation(const StationaryState& state, const GlobalOperator& a) {
  const JointBasis& basis = state.basis();
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  if (a.rows() != dim || a.cols() != dim) throw PreconditionError("operator does not match the state");
  const Matrix u = basis.dense_eigenvectors();
  const Matrix ae = u.adjoint() * a * u;
  cd acc = 0.0;
  Eigen::Index off = 0;
  for (int q = 0; q < basis.sector_count(); ++q) {
    const Eigen::Index n = basis.sector_size(q);
    acc += (state.block(q).transpose().array() * ae.block(off, off, n, n).array()).sum();
    off += n;
  }
  return acc;
}

VerificationReport verify_ness(const StationaryState& state, const Interaction& phi, const ChargeSpec& spec,
                               const CurrentGeometry& geom, double current_threshold) {
  const JointBasis& basis = state.basis();
  const ChainConfig& chain = basis.chain();
  VerificationReport rep;
  rep.current_threshold = current_threshold;
  const OperatorSum h = chain_hamiltonian_sum(phi, chain);
  const OperatorSum n = charge_sum(spec, 0, chain.n_sites - 1, chain);
  const auto& sec = basis.sectors();
  double stat = 0.0, trans = 0.0, sym = 0.0;
  for (int q = 0; q < basis.sector_count(); ++q) {
    const auto& states = sec.states(q);
    const auto ns = static_cast<Eigen::Index>(states.size());
    const Matrix u = basis.sector_eigenvectors(q);
    const Matrix rho = u * state.block(q) * u.adjoint();
    Matrix hq = Matrix::Zero(ns, ns), nq = Matrix::Zero(ns, ns);
    for (Eigen::Index c = 0; c < ns; ++c) {
      h.apply(states[static_cast<std::size_t>(c)], [&](std::uint64_t t, cd v) {
        if (sec.sector_of(t) == q) hq(sec.position(t), c) += v;
      });
      n.apply(states[static_cast<std::size_t>(c)], [&](std::uint64_t t, cd v) {
        if (sec.sector_of(t) == q) nq(sec.position(t), c) += v;
      });
    }
    stat = std::max(stat, operator_norm(rho * hq - hq * rho));
    sym = std::max(sym, operator_norm(rho * nq - nq * rho));
    if (chain.periodic()) {
      // T permutes the sector's product states
      std::vector<Eigen::Index> image(static_cast<std::size_t>(ns));
      for (Eigen::Index c = 0; c < ns; ++c) image[static_cast<std::size_t>(c)] = sec.position(shift_index(states[static_cast<std::size_t>(c)], chain));
      Matrix rt(ns, ns), tr(ns, ns);
      for (Eigen::Index c = 0; c < ns; ++c) {
        rt.col(c) = rho.col(image[static_cast<std::size_t>(c)]);
        tr.row(image[static_cast<std::size_t>(c)]) = rho.row(c);
      }
      trans = std::max(trans, operator_norm(rt - tr));
    }
  }
  rep.stationarity_residual = stat;
  rep.symmetry_residual = sym;
  rep.translation_residual = chain.periodic() ? trans : std::numeric_limits<double>::quiet_NaN();
  const cd current = expectation(state, current_operator(phi, spec, geom, chain));
  rep.current_value = current.real();
  rep.current_imag = current.imag();
  rep.stationary = rep.stationarity_residual <= 1e-10;
  rep.translation_invariant = chain.periodic() && rep.translation_residual <= 1e-10;
  rep.is_ness = rep.stationary && rep.translation_invariant && std::abs(rep.current_value) > current_threshold;
  return rep;
}

std::string state_json(const StationaryState& state, const VerificationReport& report) {
  const JointBasis& basis = state.basis();
  nlohmann::ordered_json j;
  j["n_sites"] = basis.chain().n_sites;
  j["site_dim"] = basis.chain().site_dim;
  j["beta"] = state.beta;
  j["lambda"] = state.lambda;
  j["current"] = report.current_value;
  j["residuals"] = {{"stationarity", report.stationarity_residual},
                    {"translation", report.translation_residual},
                    {"symmetry", report.symmetry_residual}};
  j["is_ness"] = report.is_ness;
  nlohmann::ordered_json spectrum = nlohmann::ordered_json::array();
  for (int q = 0; q < basis.sector_count(); ++q) {
    const auto& labels = basis.labels(q);
    const RealVector& p = state.probs()[static_cast<std::size_t>(q)];
    for (std::size_t i = 0; i < labels.size(); ++i)
      spectrum.push_back({labels[i].energy, labels[i].momentum, p(static_cast<Eigen::Index>(i))});
  }
  j["spectrum"] = std::move(spectrum);
  return j.dump(1);
}

}  // namespace nesslab
