#include "nesslab/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nesslab/global_operator.hpp"

namespace nesslab {

namespace spin {

Matrix sigma(int i) {
  Matrix m = Matrix::Zero(2, 2);
  switch (i) {
    case 1:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case 2:
      m(0, 1) = -I;
      m(1, 0) = I;
      break;
    case 3:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    default:
      throw PreconditionError("Pauli index must be 1, 2 or 3");
  }
  return m;
}

Matrix s(int i) { return 0.5 * sigma(i); }

}  // namespace spin

namespace fermion {

Matrix annihilate() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

Matrix number() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 1) = 1.0;
  return m;
}

}  // namespace fermion

namespace {

LocalOperator zero_op(int d) { return LocalOperator::zero(d); }

// Jordan-Wigner image of c_x on sites [0, x].
LocalOperator jw_annihilator(int x) {
  std::vector<std::pair<int, Matrix>> f;
  const Matrix z = Matrix::Identity(2, 2) - 2.0 * fermion::number();
  for (int y = 0; y < x; ++y) f.emplace_back(y, z);
  f.emplace_back(x, fermion::annihilate());
  return LocalOperator::product(std::move(f));
}

// Sum of operators accumulated on a fixed support.
struct Accumulator {
  std::vector<int> support;
  Matrix m;
  int d;

  Accumulator(std::vector<int> s, int site_dim) : support(std::move(s)), d(site_dim) {
    const auto dim = static_cast<Eigen::Index>(ipow(static_cast<std::uint64_t>(d), static_cast<int>(support.size())));
    m = Matrix::Zero(dim, dim);
  }
  void add(const LocalOperator& op, cd scale = 1.0) { m += scale * extend_to(op, support).coeffs(); }
  LocalOperator result() const { return LocalOperator(support, m, d); }
};

// Canonical term c translated to anchor y lies in [first, last].
bool fits(const InteractionTerm& t, int y, int first, int last) { return y >= first && y + t.offsets.back() <= last; }

double scale_of(const Interaction& phi) {
  double s = 1.0;
  for (const auto& t : phi.terms()) s = std::max(s, t.matrix.cwiseAbs().maxCoeff());
  return s;
}

}  // namespace

Model build_xxz_model(double lambda_aniso) {
  Interaction phi(2, 1);
  Matrix bond = tensor_sites({spin::s(1), spin::s(1)}) + tensor_sites({spin::s(2), spin::s(2)}) +
                lambda_aniso * tensor_sites({spin::s(3), spin::s(3)});
  phi.add_term({0, 1}, bond);
  return {std::move(phi), ChargeSpec{spin::s(3)}};
}

Model build_fermion_model(double t_hop, std::span<const double> v) {
  if (v.empty()) throw PreconditionError("fermion model needs range r >= 1");
  const int r = static_cast<int>(v.size());
  Interaction phi(2, r);
  // hopping built with the string attached at an interior anchor, then
  // checked to be string-free
  const int x = 2;
  const LocalOperator cx = jw_annihilator(x), cx1 = jw_annihilator(x + 1);
  LocalOperator hop = cx1.adjoint() * cx + cx.adjoint() * cx1;
  hop = reduce_support(hop, 1e-14);
  if (hop.support() != std::vector<int>{x, x + 1})
    throw NumericalError("nearest-neighbour hopping carries a Jordan-Wigner string");
  const LocalOperator nn = LocalOperator::product({{x, fermion::number()}, {x + 1, fermion::number()}});
  LocalOperator bond = (-t_hop) * hop + v[0] * extend_to(nn, hop.support());
  phi.add_term({0, 1}, shift(extend_to(bond, {x, x + 1}), -x).coeffs());
  for (int s = 2; s <= r; ++s) {
    const LocalOperator dd = LocalOperator::product({{0, fermion::number()}, {s, fermion::number()}});
    phi.add_term({0, s}, v[static_cast<std::size_t>(s - 1)] * dd.coeffs());
  }
  return {std::move(phi), ChargeSpec{fermion::number()}};
}

LocalOperator window_hamiltonian(const Interaction& phi, int first, int last) {
  if (first > last) return zero_op(phi.site_dim());
  Accumulator acc(site_range(first, last), phi.site_dim());
  for (std::size_t c = 0; c < phi.terms().size(); ++c)
    for (int y = first; y <= last; ++y)
      if (fits(phi.terms()[c], y, first, last)) acc.add(phi.placed(c, y));
  return acc.result();
}

LocalOperator window_charge(const ChargeSpec& spec, int first, int last, int site_dim) {
  spec.validate(site_dim);
  if (first > last) return zero_op(site_dim);
  Accumulator acc(site_range(first, last), site_dim);
  for (int x = first; x <= last; ++x) acc.add(LocalOperator::on_site(x, spec.n0));
  return acc.result();
}

LocalOperator place_on_chain(const LocalOperator& op, const ChainConfig& chain, int origin) {
  if (op.site_dim() != chain.site_dim) throw PreconditionError("site dimension does not match chain");
  return relabel(op, [&](int s) { return chain.wrap(static_cast<long long>(s) + origin); });
}

namespace {

void check_window(int first, int last, const ChainConfig& chain) {
  if (first > last) throw PreconditionError("empty window");
  if (last - first + 1 > chain.n_sites) throw PreconditionError("window longer than the chain");
}

}  // namespace

OperatorSum hamiltonian_sum(const Interaction& phi, int first, int last, const ChainConfig& chain, int origin) {
  check_window(first, last, chain);
  if (last - first + 1 == chain.n_sites && chain.periodic()) return chain_hamiltonian_sum(phi, chain);
  OperatorSum out(chain);
  for (std::size_t c = 0; c < phi.terms().size(); ++c)
    for (int y = first; y <= last; ++y)
      if (fits(phi.terms()[c], y, first, last)) out.add(place_on_chain(phi.placed(c, y), chain, origin));
  return out;
}

OperatorSum chain_hamiltonian_sum(const Interaction& phi, const ChainConfig& chain) {
  chain.validate();
  if (!chain.periodic()) return hamiltonian_sum(phi, 0, chain.n_sites - 1, chain);
  if (phi.max_diameter() >= chain.n_sites) throw PreconditionError("interaction wraps onto itself on this ring");
  OperatorSum out(chain);
  for (std::size_t c = 0; c < phi.terms().size(); ++c)
    for (int y = 0; y < chain.n_sites; ++y) out.add(place_on_chain(phi.placed(c, y), chain));
  return out;
}

OperatorSum charge_sum(const ChargeSpec& spec, int first, int last, const ChainConfig& chain, int origin) {
  check_window(first, last, chain);
  spec.validate(chain.site_dim);
  OperatorSum out(chain);
  for (int x = first; x <= last; ++x) out.add(place_on_chain(LocalOperator::on_site(x, spec.n0), chain, origin));
  return out;
}

GlobalOperator local_hamiltonian(const Interaction& phi, int first, int last, const ChainConfig& chain, int origin) {
  chain.validate();
  return hamiltonian_sum(phi, first, last, chain, origin).dense();
}

GlobalOperator chain_hamiltonian(const Interaction& phi, const ChainConfig& chain) {
  chain.validate();
  return chain_hamiltonian_sum(phi, chain).dense();
}

GlobalOperator charge_operator(const ChargeSpec& spec, int first, int last, const ChainConfig& chain, int origin) {
  chain.validate();
  return charge_sum(spec, first, last, chain, origin).dense();
}

double check_conservation(const Interaction& phi, const ChargeSpec& spec, const ChainConfig& chain, int max_window) {
  chain.validate();
  spec.validate(phi.site_dim());
  double worst = 0.0;
  const int top = std::min(max_window, chain.n_sites);
  for (int l = 1; l <= top; ++l) {
    const LocalOperator c = commutator(window_charge(spec, 0, l - 1, phi.site_dim()), window_hamiltonian(phi, 0, l - 1));
    worst = std::max(worst, operator_norm(c.coeffs()));
  }
  if (chain.periodic() && phi.max_diameter() < chain.n_sites) {
    // [N_ring, tau_y Phi] only involves the charge on the support of the term
    OperatorSum comm(chain);
    for (std::size_t c = 0; c < phi.terms().size(); ++c)
      for (int y = 0; y < chain.n_sites; ++y) {
        const LocalOperator term = phi.placed(c, y);
        LocalOperator n = zero_op(phi.site_dim());
        for (int s : term.support()) n += LocalOperator::on_site(s, spec.n0);
        comm.add(place_on_chain(commutator(n, term), chain));
      }
    const auto sectors = ChargeSectors::build(chain, spec.diagonal() ? std::optional<Matrix>(spec.n0) : std::nullopt);
    worst = std::max(worst, SectorMatrix::from_sum(comm, sectors).norm());
  }
  return worst;
}

void CurrentGeometry::validate(const ChainConfig& chain) const {
  chain.validate();
  if (r < 1) throw PreconditionError("interaction range must be positive");
  if (strict) {
    if (!(L > M)) throw PreconditionError("geometry requires L > M");
    if (!(M > 2 * r)) throw PreconditionError("geometry requires M > 2r");
    if (!(L - M > 2 * r)) throw PreconditionError("geometry requires L - M > 2r");
  } else {
    if (!(M >= r)) throw PreconditionError("geometry requires M >= r");
    if (!(L >= M)) throw PreconditionError("geometry requires L >= M");
  }
  if (L + M + 1 > chain.n_sites) throw PreconditionError("arc [-L, M] does not fit on the chain");
}

namespace {

LocalOperator window_current(const Interaction& phi, const ChargeSpec& spec, int L, int M) {
  spec.validate(phi.site_dim());
  const int d = phi.site_dim();
  // terms inside [-M, 0] must cancel by conservation; the rest straddle the
  // cut between 0 and 1
  Accumulator interior(site_range(-M, 0), d);
  Accumulator boundary(site_range(-phi.range() + 1, phi.range()), d);
  for (std::size_t c = 0; c < phi.terms().size(); ++c)
    for (int y = -M; y <= M; ++y) {
      if (!fits(phi.terms()[c], y, -M, M)) continue;
      const LocalOperator term = phi.placed(c, y);
      LocalOperator n = zero_op(d);
      bool inside = true, touches = false;
      for (int s : term.support()) {
        if (s >= -L && s <= 0) {
          n += LocalOperator::on_site(s, spec.n0);
          touches = true;
        } else {
          inside = false;
        }
      }
      if (!touches) continue;
      (inside ? interior : boundary).add(commutator(n, term), I);
    }
  const double scale = scale_of(phi) * std::max(1.0, spec.n0.cwiseAbs().maxCoeff());
  if (interior.m.cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw PreconditionError("interaction does not conserve the charge; current is not local");
  return reduce_support(boundary.result(), 1e-13);
}

}  // namespace

LocalOperator current_density(const Interaction& phi, const ChargeSpec& spec) {
  return window_current(phi, spec, phi.range(), phi.range());
}

LocalOperator current_operator(const Interaction& phi, const ChargeSpec& spec, const CurrentGeometry& geom,
                               const ChainConfig& chain) {
  if (geom.r != phi.range()) throw PreconditionError("geometry range does not match the interaction");
  geom.validate(chain);
  return window_current(phi, spec, geom.L, geom.M);
}

EnergyCurrents energy_current_operators(const Interaction& phi, int M, const ChainConfig& chain) {
  chain.validate();
  const int r = phi.range();
  if (M < r) throw PreconditionError("energy currents need M >= r");
  if (2 * (M + r) + 1 > chain.n_sites) throw PreconditionError("window [-M-r, M+r] does not fit on the chain");
  const int d = phi.site_dim();
  Accumulator right(site_range(M - 2 * r + 1, M + r), d);
  Accumulator left(site_range(-M - r, -M + 2 * r - 1), d);
  const auto& terms = phi.terms();
  for (std::size_t cy = 0; cy < terms.size(); ++cy)
    for (int y = -M - r; y <= M + r; ++y) {
      if (!fits(terms[cy], y, -M - r, M + r) || fits(terms[cy], y, -M, M)) continue;
      const LocalOperator Y = phi.placed(cy, y);
      const bool is_right = Y.max_site() > M;
      for (std::size_t cx = 0; cx < terms.size(); ++cx)
        for (int x = -M; x <= M; ++x) {
          if (!fits(terms[cx], x, -M, M)) continue;
          const LocalOperator X = phi.placed(cx, x);
          if (X.max_site() < Y.min_site() || Y.max_site() < X.min_site()) continue;
          const LocalOperator c = commutator(X, Y);
          (is_right ? right : left).add(c, I);
        }
    }
  return {reduce_support(right.result(), 1e-13), reduce_support(-left.result(), 1e-13)};
}

namespace {

// I_s = [-m, m] for s = 2m+1 and [-m+1, m] for s = 2m.
std::pair<int, int> centred_interval(int s) {
  const int m = s / 2;
  return s % 2 ? std::pair{-m, m} : std::pair{-m + 1, m};
}

}  // namespace

EnergyDensity energy_density(const Interaction& phi) {
  const int r = phi.range();
  const int d = phi.site_dim();
  const double scale = scale_of(phi);
  EnergyDensity out{zero_op(d), {}};
  for (int s = 1; s <= 2 * r + 1; ++s) {
    const auto [a, b] = centred_interval(s);
    LocalOperator p = window_hamiltonian(phi, a, b) - window_hamiltonian(phi, a + 1, b) -
                      window_hamiltonian(phi, a, b - 1) + window_hamiltonian(phi, a + 1, b - 1);
    p = extend_to(p, site_range(a, b));
    if (s > r + 1 && p.max_abs() > 1e-12 * scale)
      throw NumericalError("telescoped piece beyond the interaction range is nonzero");
    out.h += p;
    out.phi_s.push_back(std::move(p));
  }
  return out;
}

BoundaryTerms boundary_terms(const Interaction& phi, int M) {
  const int r = phi.range();
  if (M < r) throw PreconditionError("boundary terms need M >= r");
  const EnergyDensity ed = energy_density(phi);
  const int d = phi.site_dim();
  Accumulator left(site_range(-M, -M + 2 * r), d);
  Accumulator right(site_range(M - 2 * r, M), d);
  for (int s = 1; s <= 2 * r + 1; ++s) {
    const auto [a, b] = centred_interval(s);
    const LocalOperator& p = ed.phi_s[static_cast<std::size_t>(s - 1)];
    for (int y = -M - a; y + b <= M; ++y) {
      if (y >= -M + r && y <= M - r) continue;
      (y < -M + r ? left : right).add(shift(p, y));
    }
  }
  return {left.result(), right.result()};
}

double lr_velocity(const Interaction& phi) {
  const double er = std::exp(static_cast<double>(phi.range()));
  const double base = static_cast<double>(phi.site_dim());
  double v = 0.0;
  for (std::size_t c = 0; c < phi.terms().size(); ++c) {
    const double size = static_cast<double>(phi.terms()[c].offsets.size());
    const double norm = phi.placed(c, 0).norm();
    v += size * (size * std::pow(base, 2.0 * size) * er * norm);
  }
  return v;
}

}  // namespace nesslab
