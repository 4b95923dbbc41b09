#include "nesslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "nesslab/io.hpp"

namespace nesslab {

namespace {

constexpr double kFreqGrid = 1e10;  // energy transfers equal to 1e-10 are merged

cd root_of_unity(long long p, int n) {
  const long long r = ((p % n) + n) % n;
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n));
}

struct RawEntry {
  int dm;
  long long key;
  double de;
  cd w;
};

long long freq_key(double de) { return std::llround(de * kFreqGrid); }

PairTable merge(std::vector<RawEntry>& raw, int n) {
  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawEntry& a, const RawEntry& b) { return std::tie(a.dm, a.key) < std::tie(b.dm, b.key); });
  PairTable out;
  out.n_sites = n;
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    cd acc = 0.0;
    while (j < raw.size() && raw[j].dm == raw[i].dm && raw[j].key == raw[i].key) acc += raw[j++].w;
    out.dm.push_back(raw[i].dm);
    out.de.push_back(raw[i].de);
    out.weight.push_back(acc);
    i = j;
  }
  return out;
}

void require_diagonal_state(const StationaryState& state) {
  if (!state.diagonal()) throw PreconditionError("spectral weights need a state diagonal in the joint eigenbasis");
  if (!state.basis().has_momentum()) throw PreconditionError("spectral weights need momentum labels (periodic chain)");
}

void require_conserving(const OperatorSum& a, const ChargeSectors& sectors) {
  if (!sectors.resolved()) return;
  for (int q = 0; q < sectors.count(); ++q)
    for (std::uint64_t s : sectors.states(q))
      a.apply(s, [&](std::uint64_t t, cd v) {
        if (v != cd(0.0) && sectors.sector_of(t) != q) throw PreconditionError("operator does not conserve the charge");
      });
}

enum class Form { commutator, product };

// Eigenbasis blocks of an operator, one per sector.
std::vector<Matrix> blocks_of(const StationaryState& state, const OperatorSum& a) {
  const JointBasis& basis = state.basis();
  require_conserving(a, basis.sectors());
  std::vector<Matrix> out;
  for (int q = 0; q < basis.sector_count(); ++q) out.push_back(basis.transform(a, q, q));
  return out;
}

cd mean_of(const StationaryState& state, const std::vector<Matrix>& blocks) {
  cd acc = 0.0;
  for (std::size_t q = 0; q < blocks.size(); ++q)
    acc += (state.probs()[q].cast<cd>().array() * blocks[q].diagonal().array()).sum();
  return acc;
}

PairTable table_from_blocks(const StationaryState& state, const std::vector<Matrix>& a, const std::vector<Matrix>& b,
                            Form form) {
  const JointBasis& basis = state.basis();
  const int n = basis.chain().n_sites;
  std::vector<RawEntry> raw;
  for (int q = 0; q < basis.sector_count(); ++q) {
    const auto& labels = basis.labels(q);
    const RealVector& p = state.probs()[static_cast<std::size_t>(q)];
    const Matrix& aq = a[static_cast<std::size_t>(q)];
    const Matrix& bq = b[static_cast<std::size_t>(q)];
    const Eigen::Index ns = aq.rows();
    for (Eigen::Index m = 0; m < ns; ++m)
      for (Eigen::Index k = 0; k < ns; ++k) {  // k plays the role of n
        const cd ab = aq(k, m) * bq(m, k);
        if (ab == cd(0.0)) continue;
        const double pref = form == Form::commutator ? p(k) - p(m) : p(k);
        if (pref == 0.0) continue;
        const auto& lm = labels[static_cast<std::size_t>(m)];
        const auto& lk = labels[static_cast<std::size_t>(k)];
        const double de = lm.energy - lk.energy;
        const int dm = (((lm.m - lk.m) % n) + n) % n;
        raw.push_back({dm, freq_key(de), de, I * pref * ab});
      }
  }
  return merge(raw, n);
}

OperatorSum single(const LocalOperator& op, const ChainConfig& chain) {
  OperatorSum s(chain);
  s.add(place_on_chain(op, chain));
  return s;
}

// sum_{x=first}^{last} omega^{sign * dm * x}
std::vector<cd> phase_sums(int first, int last, int sign, int n) {
  std::vector<cd> out(static_cast<std::size_t>(n), 0.0);
  for (int dm = 0; dm < n; ++dm)
    for (int x = first; x <= last; ++x) out[static_cast<std::size_t>(dm)] += root_of_unity(static_cast<long long>(sign) * dm * x, n);
  return out;
}

CorrelationFunction collapse(std::vector<RawEntry>& raw) {
  std::stable_sort(raw.begin(), raw.end(), [](const RawEntry& a, const RawEntry& b) { return a.key < b.key; });
  CorrelationFunction c;
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    cd acc = 0.0;
    while (j < raw.size() && raw[j].key == raw[i].key) acc += raw[j++].w;
    if (acc != cd(0.0)) {
      c.freqs.push_back(raw[i].de);
      c.amps.push_back(acc);
    }
    i = j;
  }
  return c;
}

// -sum_{|z|<=M} z e^{i dk z}
cd moment_kernel(double dk, int M) {
  cd acc = 0.0;
  for (int z = 1; z <= M; ++z) acc += -2.0 * I * static_cast<double>(z) * std::sin(dk * z);
  return acc;
}

cd window_kernel(double dk, int first, int last) {
  cd acc = 0.0;
  for (int z = first; z <= last; ++z) acc += std::polar(1.0, dk * z);
  return acc;
}

}  // namespace

double PairTable::dk(std::size_t i) const { return momentum_of(dm[i], n_sites); }

cd PairTable::total() const {
  cd acc = 0.0;
  for (const cd& w : weight) acc += w;
  return acc;
}

PairTable commutator_table(const StationaryState& state, const OperatorSum& a, const OperatorSum& b) {
  require_diagonal_state(state);
  return table_from_blocks(state, blocks_of(state, a), blocks_of(state, b), Form::commutator);
}

PairTable product_table(const StationaryState& state, const OperatorSum& a, const OperatorSum& b) {
  require_diagonal_state(state);
  return table_from_blocks(state, blocks_of(state, a), blocks_of(state, b), Form::product);
}

cd CorrelationFunction::complex_value(double t) const {
  cd acc = 0.0;
  for (std::size_t j = 0; j < freqs.size(); ++j) acc += amps[j] * std::polar(1.0, freqs[j] * t);
  return acc;
}

double CorrelationFunction::windowed_integral(const WindowFunction& w) const {
  const double s = std::sqrt(2.0 * std::numbers::pi);
  double acc = 0.0;
  for (std::size_t j = 0; j < freqs.size(); ++j) acc += amps[j].real() * s * w.transform(freqs[j]);
  return acc;
}

CurrentCorrelator::CurrentCorrelator(const StationaryState& state, const Interaction& phi, const ChargeSpec& spec)
    : state_(&state), phi_(&phi) {
  require_diagonal_state(state);
  const ChainConfig& chain = state.basis().chain();
  spec.validate(chain.site_dim);
  const auto n0 = blocks_of(state, single(LocalOperator::on_site(0, spec.n0), chain));
  for (std::size_t c = 0; c < phi.terms().size(); ++c)
    tables_.push_back(table_from_blocks(state, n0, blocks_of(state, single(phi.placed(c, 0), chain)), Form::commutator));
}

CorrelationFunction CurrentCorrelator::correlation(int L, int M) const {
  const int n = state_->basis().chain().n_sites;
  const auto sn = phase_sums(-L, 0, 1, n);
  std::vector<RawEntry> raw;
  for (std::size_t c = 0; c < tables_.size(); ++c) {
    const int diam = phi_->terms()[c].offsets.back();
    const auto sc = phase_sums(-M, M - diam, -1, n);
    const PairTable& g = tables_[c];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto d = static_cast<std::size_t>(g.dm[i]);
      const cd amp = g.weight[i] * sn[d] * sc[d];
      if (amp != cd(0.0)) raw.push_back({0, freq_key(g.de[i]), g.de[i], amp});
    }
  }
  return collapse(raw);
}

double wrap_horizon(const Interaction& phi, const ChainConfig& chain, double v_emp) {
  const double v = v_emp > 0.0 ? v_emp : default_empirical_velocity(phi);
  return static_cast<double>(chain.n_sites) / (2.0 * v);
}

double correlation_C(const StationaryState& state, const Interaction& phi, const ChargeSpec& spec,
                     const CurrentGeometry& geom, double t, double v_emp) {
  const ChainConfig& chain = state.basis().chain();
  geom.validate(chain);
  if (std::abs(t) >= wrap_horizon(phi, chain, v_emp)) throw PreconditionError("time beyond the wrap horizon of the ring");
  return CurrentCorrelator(state, phi, spec).correlation(geom.L, geom.M).value(t);
}

double correlation_C_backward(const StationaryState& state, const Interaction& phi, const ChargeSpec& spec,
                              const CurrentGeometry& geom, double t) {
  require_diagonal_state(state);
  const JointBasis& basis = state.basis();
  const ChainConfig& chain = basis.chain();
  geom.validate(chain);
  const auto nb = blocks_of(state, charge_sum(spec, -geom.L, 0, chain));
  const auto hb = blocks_of(state, hamiltonian_sum(phi, -geom.M, geom.M, chain));
  double acc = 0.0;
  for (int q = 0; q < basis.sector_count(); ++q) {
    const auto& labels = basis.labels(q);
    const auto ns = static_cast<Eigen::Index>(labels.size());
    RealVector e(ns);
    for (Eigen::Index i = 0; i < ns; ++i) e(i) = labels[static_cast<std::size_t>(i)].energy;
    // N(-t)_ab = e^{-i (E_a - E_b) t} N_ab
    Matrix nt = nb[static_cast<std::size_t>(q)];
    for (Eigen::Index b = 0; b < ns; ++b)
      for (Eigen::Index a = 0; a < ns; ++a) nt(a, b) *= std::polar(1.0, -(e(a) - e(b)) * t);
    const Matrix& h = hb[static_cast<std::size_t>(q)];
    const Matrix comm = nt * h - h * nt;
    acc += (I * (state.probs()[static_cast<std::size_t>(q)].cast<cd>().array() * comm.diagonal().array()).sum()).real();
  }
  return acc;
}

SumRuleResult sum_rule_check(const CurrentCorrelator& corr, const CurrentGeometry& geom, const WindowFunction& window,
                             double current, const ChainConfig& chain, double horizon) {
  geom.validate(chain);
  window.validate();
  if (window.T >= horizon) throw PreconditionError("window extends past the wrap horizon (2 v T >= n)");
  const CorrelationFunction c = corr.correlation(geom.L, geom.M);
  const QuadratureResult q = integrate([&](double t) { return window.value(t) * c.value(t); }, -window.T, window.T);
  SumRuleResult r;
  r.lhs = q.value;
  r.quadrature_error = q.error;
  r.panels = q.panels;
  r.closed_form_lhs = c.windowed_integral(window);
  r.c0 = c.value(0.0);
  r.current = current;
  r.rhs = std::sqrt(2.0 * std::numbers::pi) * current * window.transform(0.0);
  r.abs_err = std::abs(r.lhs - r.rhs);
  r.rel_err = r.abs_err / std::abs(r.rhs);
  return r;
}

SumRuleResult sum_rule_check(const StationaryState& state, const Interaction& phi, const ChargeSpec& spec,
                             const CurrentGeometry& geom, const WindowFunction& window, double v_emp) {
  const ChainConfig& chain = state.basis().chain();
  const double current = expectation(state, current_density(phi, spec)).real();
  return sum_rule_check(CurrentCorrelator(state, phi, spec), geom, window, current, chain,
                        wrap_horizon(phi, chain, v_emp));
}

DeviationNorms measured_norms(const Interaction& phi, const ChargeSpec& spec, const CurrentGeometry& geom,
                              const ChainConfig& chain) {
  const EnergyCurrents ec = energy_current_operators(phi, geom.M, chain);
  DeviationNorms n;
  n.n = LocalOperator::on_site(0, spec.n0).norm();
  n.J = ec.plus.norm();
  n.J0 = ec.minus.norm();
  n.j = current_density(phi, spec).norm();
  return n;
}

std::vector<FlatnessRow> flatness_check(const CurrentCorrelator& corr, const Interaction& phi, const ChargeSpec& spec,
                                        const CurrentGeometry& geom, const ChainConfig& chain,
                                        const std::vector<double>& times) {
  geom.validate(chain);
  const DeviationNorms norms = measured_norms(phi, spec, geom, chain);
  const CorrelationFunction c = corr.correlation(geom.L, geom.M);
  const double c0 = c.value(0.0);
  std::vector<FlatnessRow> rows;
  for (double t : times) {
    FlatnessRow r;
    r.t = t;
    r.c = c.value(t);
    r.deviation = std::abs(r.c - c0);
    r.bound = deviation_bound_Z(phi, geom.M, geom.L, t, norms);
    r.ok = r.deviation <= r.bound + 1e-12;
    rows.push_back(r);
  }
  return rows;
}

cd SpectralFunction::rho(int z, double t) const {
  cd acc = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) acc += table.weight[i] * std::polar(1.0, table.dk(i) * z - table.de[i] * t);
  return acc / (2.0 * std::numbers::pi * std::sqrt(2.0 * std::numbers::pi));
}

SpectralFunction spectral_function_rho(const StationaryState& state, const LocalOperator& n, const LocalOperator& h,
                                       std::string state_id, std::string left_id, std::string right_id) {
  require_diagonal_state(state);
  const ChainConfig& chain = state.basis().chain();
  auto nb = blocks_of(state, single(n, chain));
  auto hb = blocks_of(state, single(h, chain));
  const cd nm = mean_of(state, nb), hm = mean_of(state, hb);
  for (auto& b : nb) b.diagonal().array() -= nm;
  for (auto& b : hb) b.diagonal().array() -= hm;
  SpectralFunction s;
  s.table = table_from_blocks(state, nb, hb, Form::product);
  s.state_id = std::move(state_id);
  s.left_id = std::move(left_id);
  s.right_id = std::move(right_id);
  const PairTable swapped = table_from_blocks(state, hb, nb, Form::product);
  std::map<std::pair<int, long long>, cd> lookup;
  for (std::size_t i = 0; i < swapped.size(); ++i) lookup[{swapped.dm[i], freq_key(swapped.de[i])}] = swapped.weight[i];
  double worst = 0.0;
  for (std::size_t i = 0; i < s.table.size(); ++i) {
    const auto it = lookup.find({s.table.dm[i], freq_key(s.table.de[i])});
    const cd other = it == lookup.end() ? cd(0.0) : it->second;
    worst = std::max(worst, std::abs(other + std::conj(s.table.weight[i])));
    if (it != lookup.end()) lookup.erase(it);
  }
  for (const auto& [key, w] : lookup) worst = std::max(worst, std::abs(w));
  s.pairing_residual = worst;
  return s;
}

std::string spectral_csv(const SpectralFunction& s) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < s.table.size(); ++i)
    rows.push_back({std::to_string(s.table.dm[i]), format_double(s.table.dk(i)), format_double(s.table.de[i]),
                    format_double(s.table.weight[i].real()), format_double(s.table.weight[i].imag())});
  return csv_text({"dk_index", "dk_value", "de_value", "weight_re", "weight_im"}, rows);
}

MomentTerms moment_terms(const SpectralFunction& s, const WindowFunction& window, int M) {
  const int n = s.table.n_sites;
  if (M < 0 || 2 * M + 1 > n) throw PreconditionError("moment window does not fit on the ring");
  const double root = std::sqrt(2.0 * std::numbers::pi);
  MomentTerms t;
  t.M = M;
  for (std::size_t i = 0; i < s.table.size(); ++i) {
    const double dk = s.table.dk(i);
    const cd w = s.table.weight[i] * root * window.transform(s.table.de[i]);
    t.moment += 2.0 * (w * moment_kernel(dk, M)).real();
    t.window += 2.0 * (w * window_kernel(dk, -M, M)).real();
    t.outer += 2.0 * (w * window_kernel(dk, -(n - M - 1), -M - 1)).real();
  }
  t.window *= M + 1;
  t.outer *= 2 * M + 1;
  return t;
}

MomentumDerivativeResult momentum_derivative_check(const SpectralFunction& s, const WindowFunction& window, int M,
                                                   double current, double symmetry_residual) {
  if (!(symmetry_residual <= 1e-10))
    throw PreconditionError("state does not commute with the total charge; symmetry-breaking branch is not supported");
  window.validate();
  MomentumDerivativeResult r;
  r.M = M;
  r.symmetry_residual = symmetry_residual;
  r.terms = moment_terms(s, window, M);
  r.lhs = r.terms.moment / std::sqrt(2.0 * std::numbers::pi);
  r.rhs = current * window.transform(0.0);
  r.abs_err = std::abs(r.lhs - r.rhs);
  r.rel_err = r.abs_err / std::abs(r.rhs);
  return r;
}

double moment_term_time_domain(const StationaryState& state, const LocalOperator& n, const LocalOperator& h,
                               const WindowFunction& window, int M) {
  const ChainConfig& chain = state.basis().chain();
  const PairTable g = commutator_table(state, single(n, chain), single(h, chain));
  const int ns = chain.n_sites;
  // collapse to one trigonometric polynomial in t with the position moment applied
  std::vector<RawEntry> raw;
  for (std::size_t i = 0; i < g.size(); ++i) {
    cd k = 0.0;
    for (int d = -M; d <= M; ++d) k += static_cast<double>(d) * root_of_unity(-static_cast<long long>(g.dm[i]) * d, ns);
    raw.push_back({0, freq_key(g.de[i]), g.de[i], g.weight[i] * k});
  }
  const CorrelationFunction c = collapse(raw);
  return integrate([&](double t) { return window.value(t) * c.value(t); }, -window.T, window.T, 1e-11).value;
}

SingularityProfile singularity_diagnostic(const SpectralFunction& s, const std::vector<double>& eps_windows, int M) {
  const int n = s.table.n_sites;
  SingularityProfile p;
  p.M = M > 0 ? M : (n + 1) / 2 - 1;
  if (2 * p.M + 1 > n) throw PreconditionError("moment window does not fit on the ring");
  std::vector<double> weight(s.table.size());
  for (std::size_t i = 0; i < s.table.size(); ++i) {
    weight[i] = 2.0 * (s.table.weight[i] * moment_kernel(s.table.dk(i), p.M)).real();
    p.total += weight[i];
  }
  p.no_current = std::abs(p.total) <= 1e-12;
  for (double eps : eps_windows) {
    p.eps.push_back(eps);
    if (p.no_current) {
      p.fraction.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double part = 0.0;
    for (std::size_t i = 0; i < s.table.size(); ++i)
      if (std::abs(s.table.de[i]) < eps) part += weight[i];
    p.fraction.push_back(part / p.total);
  }
  return p;
}

std::string derivative_json(const MomentumDerivativeResult& r) {
  nlohmann::ordered_json j;
  j["M"] = r.M;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["abs_err"] = r.abs_err;
  j["rel_err"] = r.rel_err;
  j["symmetry_residual"] = r.symmetry_residual;
  j["terms"] = {{"outer", r.terms.outer}, {"window", r.terms.window}, {"moment", r.terms.moment}};
  return j.dump(1);
}

std::string singularity_json(const SingularityProfile& p) {
  nlohmann::ordered_json j;
  j["M"] = p.M;
  j["total"] = p.total;
  j["status"] = p.no_current ? "no current" : "ok";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < p.eps.size(); ++i) {
    nlohmann::ordered_json row;
    row["eps"] = std::isfinite(p.eps[i]) ? nlohmann::ordered_json(p.eps[i]) : nlohmann::ordered_json("inf");
    row["fraction"] = std::isnan(p.fraction[i]) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(p.fraction[i]);
    rows.push_back(std::move(row));
  }
  j["profile"] = std::move(rows);
  return j.dump(1);
}

}  // namespace nesslab
