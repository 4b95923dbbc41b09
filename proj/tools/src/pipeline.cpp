#include "nesslab_app/pipeline.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "nesslab/io.hpp"

namespace nesslab::app {

using json = nlohmann::ordered_json;

namespace {

json complex_json(cd v) { return json::array({v.real(), v.imag()}); }

// Coefficients on products of {1, S1, S2, S3} for spin-1/2 supports.
json spin_expansion(const LocalOperator& op) {
  json out = json::array();
  const auto k = static_cast<int>(op.support().size());
  if (op.site_dim() != 2 || k == 0 || k > 4) return out;
  const Matrix basis[4] = {Matrix::Identity(2, 2), spin::s(1), spin::s(2), spin::s(3)};
  const double norm2[4] = {2.0, 0.5, 0.5, 0.5};
  int total = 1;
  for (int i = 0; i < k; ++i) total *= 4;
  for (int code = 0; code < total; ++code) {
    std::vector<Matrix> factors;
    std::string label;
    double denom = 1.0;
    for (int i = 0, c = code; i < k; ++i, c /= 4) {
      factors.push_back(basis[c % 4]);
      denom *= norm2[c % 4];
      label += (i ? " " : "") + std::string(c % 4 == 0 ? "1" : "S" + std::to_string(c % 4));
    }
    const Matrix e = tensor_sites(factors);
    const cd coeff = (e.adjoint() * op.coeffs()).trace() / denom;
    if (std::abs(coeff) > 1e-13) out.push_back({{"ops", label}, {"coeff", complex_json(coeff)}});
  }
  return out;
}

json operator_json(const LocalOperator& op) {
  json m = json::array();
  for (Eigen::Index i = 0; i < op.coeffs().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < op.coeffs().cols(); ++j) row.push_back(complex_json(op.coeffs()(i, j)));
    m.push_back(std::move(row));
  }
  return {{"support", op.support()}, {"matrix", std::move(m)}, {"spin_expansion", spin_expansion(op)}};
}

json config_summary(const ExperimentConfig& c, const CurrentGeometry& g) {
  return {{"model", std::string(to_string(c.model.kind))},
          {"n_sites", c.chain.n_sites},
          {"beta", c.bias.beta},
          {"lambda", c.bias.lambda},
          {"L", g.L},
          {"M", g.M},
          {"window", std::string(to_string(c.window.kind))},
          {"T", c.window.T}};
}

}  // namespace

Subcommand subcommand_from_string(std::string_view s) {
  if (s == "build") return Subcommand::build;
  if (s == "verify-lr") return Subcommand::verify_lr;
  if (s == "ness") return Subcommand::ness;
  if (s == "sumrule") return Subcommand::sumrule;
  if (s == "spectral") return Subcommand::spectral;
  if (s == "all") return Subcommand::all;
  throw ConfigError("unknown subcommand '" + std::string(s) + "'");
}

std::string_view to_string(Subcommand s) {
  switch (s) {
    case Subcommand::build: return "build";
    case Subcommand::verify_lr: return "verify-lr";
    case Subcommand::ness: return "ness";
    case Subcommand::sumrule: return "sumrule";
    case Subcommand::spectral: return "spectral";
    case Subcommand::all: return "all";
  }
  return "?";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::precondition: return 3;
    case ErrorKind::numerical: return 4;
  }
  return 1;
}

std::string error_json(const std::string& kind, const std::string& message, int exit_code) {
  return json{{"error", kind}, {"message", message}, {"exit_code", exit_code}}.dump();
}

Pipeline::Pipeline(ExperimentConfig config, std::filesystem::path out)
    : config_((config.validate(), std::move(config))), out_(std::move(out)), model_(config_.model.build()) {}

RunResult Pipeline::run(Subcommand cmd) {
  RunResult r;
  spdlog::info("running '{}' on {} sites", to_string(cmd), config_.chain.n_sites);
  switch (cmd) {
    case Subcommand::build: stage_build(r); break;
    case Subcommand::verify_lr: stage_verify_lr(r); break;
    case Subcommand::ness: stage_ness(r); break;
    case Subcommand::sumrule: stage_sumrule(r); break;
    case Subcommand::spectral: stage_spectral(r); break;
    case Subcommand::all:
      write(r, "config.ini", serialize_config(config_));
      stage_build(r);
      stage_verify_lr(r);
      stage_ness(r);
      stage_sumrule(r);
      stage_spectral(r);
      break;
  }
  r.exit_code = r.failed_checks.empty() ? 0 : 4;
  for (const auto& f : r.failed_checks) spdlog::warn("check failed: {}", f);
  return r;
}

void Pipeline::write(RunResult& r, const std::string& name, const std::string& content) {
  const auto path = out_ / name;
  atomic_write(path, content);
  r.artifacts.push_back(path);
  spdlog::debug("wrote {}", path.string());
}

int Pipeline::scan_gap() const { return config_.scan.gap > 0 ? config_.scan.gap : config_.geometry.L - config_.geometry.M; }

const StationaryState& Pipeline::state() {
  if (!state_) {
    spdlog::info("building the biased Gibbs state (dimension {})", config_.chain.dimension());
    state_.emplace(build_biased_gibbs(model_.phi, model_.charge, config_.bias, config_.chain));
  }
  return *state_;
}

const VerificationReport& Pipeline::report() {
  if (!report_) {
    const StationaryState& s = state();
    spdlog::info("verifying stationarity and translation invariance");
    report_ = verify_ness(s, model_.phi, model_.charge, config_.geometry, config_.checks.current_threshold);
  }
  return *report_;
}

const CurrentCorrelator& Pipeline::correlator() {
  if (!correlator_) {
    const StationaryState& s = state();
    spdlog::info("tabulating current correlation weights");
    correlator_ = std::make_unique<CurrentCorrelator>(s, model_.phi, model_.charge);
  }
  return *correlator_;
}

void Pipeline::stage_build(RunResult& r) {
  const Interaction& phi = model_.phi;
  const double conservation = check_conservation(phi, model_.charge, config_.chain, 8);
  const LocalOperator j0 = current_operator(phi, model_.charge, config_.geometry, config_.chain);
  const EnergyDensity ed = energy_density(phi);
  json j;
  j["model"] = std::string(to_string(config_.model.kind));
  j["range"] = phi.range();
  j["site_dim"] = phi.site_dim();
  j["lr_velocity"] = lr_velocity(phi);
  j["conservation_residual"] = conservation;
  j["j0"] = operator_json(j0);
  j["h"] = operator_json(ed.h);
  j["interaction"] = json::parse(serialize(phi, model_.charge));
  write(r, "build.json", j.dump(1) + "\n");
  if (conservation > 1e-12) r.failed_checks.push_back("conservation");
}

void Pipeline::stage_verify_lr(RunResult& r) {
  const StationaryState& s = state();
  const LocalOperator a = LocalOperator::on_site(0, spin::sigma(3));
  LRScanOptions opts;
  if (model_.charge.diagonal()) opts.charge = model_.charge.n0;
  const LRScanResult res = lr_scan(s.basis(), model_.phi, a, a, config_.scan.x_values, config_.scan.t_values, opts);
  write(r, "lr_scan.csv", lr_scan_csv(res));
  json j;
  j["observable"] = "sigma3";
  j["velocity"] = res.velocity;
  j["v_emp"] = res.v_emp;
  j["points"] = res.rows.size();
  j["excluded"] = res.excluded;
  j["violations"] = res.violations;
  write(r, "lr_report.json", j.dump(1) + "\n");
  if (res.violations > 0) r.failed_checks.push_back("lieb_robinson");
}

void Pipeline::stage_ness(RunResult& r) {
  const VerificationReport& rep = report();
  write(r, "state.json", state_json(state(), rep) + "\n");
  spdlog::info("current {} ({})", rep.current_value, rep.is_ness ? "NESS" : "not a NESS");
}

void Pipeline::stage_sumrule(RunResult& r) {
  const StationaryState& s = state();
  const ChainConfig& chain = config_.chain;
  const double horizon = wrap_horizon(model_.phi, chain);
  const double current = expectation(s, current_density(model_.phi, model_.charge)).real();
  const CurrentCorrelator& corr = correlator();
  const CurrentGeometry& g = config_.geometry;
  const SumRuleResult sr = sum_rule_check(corr, g, config_.window, current, chain, horizon);

  const CorrelationFunction c = corr.correlation(g.L, g.M);
  std::vector<std::vector<std::string>> rows;
  const int samples = 200;
  for (int i = 0; i <= samples; ++i) {
    const double t = -config_.window.T + 2.0 * config_.window.T * i / samples;
    rows.push_back({format_double(t), format_double(c.value(t)), format_double(config_.window.value(t))});
  }
  write(r, "correlation.csv", csv_text({"t", "C", "f"}, rows));

  const auto flat = flatness_check(corr, model_.phi, model_.charge, g, chain, config_.scan.flat_times);
  rows.clear();
  bool flat_ok = true;
  for (const auto& f : flat) {
    rows.push_back({format_double(f.t), format_double(f.c), format_double(f.deviation), format_double(f.bound),
                    f.ok ? "1" : "0"});
    flat_ok = flat_ok && f.ok;
  }
  write(r, "flatness.csv", csv_text({"t", "C", "deviation", "Z", "ok"}, rows));

  json scan = json::array();
  std::vector<double> errs;
  for (int M : config_.scan.M_values) {
    CurrentGeometry gm = config_.geometry_for(M + scan_gap(), M);
    gm.strict = false;
    const SumRuleResult x = sum_rule_check(corr, gm, config_.window, current, chain, horizon);
    scan.push_back({{"M", M}, {"L", gm.L}, {"lhs", x.lhs}, {"rel_err", x.rel_err}});
    errs.push_back(x.rel_err);
  }
  bool improving = errs.size() >= 2;
  for (std::size_t i = 1; i < errs.size(); ++i) improving = improving && errs[i] < errs[i - 1];

  json j;
  j["config"] = config_summary(config_, g);
  j["lhs"] = sr.lhs;
  j["rhs"] = sr.rhs;
  j["abs_err"] = sr.abs_err;
  j["rel_err"] = sr.rel_err;
  j["horizon"] = horizon;
  j["closed_form_lhs"] = sr.closed_form_lhs;
  j["quadrature_error"] = sr.quadrature_error;
  j["quadrature_panels"] = sr.panels;
  j["c0"] = sr.c0;
  j["current"] = sr.current;
  j["flatness_ok"] = flat_ok;
  j["scan_gap"] = scan_gap();
  j["scan"] = std::move(scan);
  j["scan_strictly_improving"] = improving;
  write(r, "sumrule.json", j.dump(1) + "\n");
  spdlog::info("sum rule rel_err {}", sr.rel_err);
  if (!(sr.rel_err <= config_.checks.sumrule_tol)) r.failed_checks.push_back("sumrule");
  if (!flat_ok) r.failed_checks.push_back("flatness");
}

void Pipeline::stage_spectral(RunResult& r) {
  const StationaryState& s = state();
  const VerificationReport& rep = report();
  const LocalOperator n0 = LocalOperator::on_site(0, model_.charge.n0);
  const LocalOperator h = energy_density(model_.phi).h;
  const SpectralFunction sf = spectral_function_rho(s, n0, h);
  write(r, "spectral.csv", spectral_csv(sf));

  const double horizon = wrap_horizon(model_.phi, config_.chain);
  const MomentumDerivativeResult d =
      momentum_derivative_check(sf, config_.window, config_.geometry.M, rep.current_value, rep.symmetry_residual);
  json j = json::parse(derivative_json(d));
  j["config"] = config_summary(config_, config_.geometry);
  j["horizon"] = horizon;
  j["pairing_residual"] = sf.pairing_residual;
  j["completeness"] = complex_json(sf.table.total());

  const double root = std::sqrt(2.0 * std::numbers::pi);
  json scan = json::array();
  double prev_outer = INFINITY, prev_window = INFINITY;
  bool decreasing = true;
  for (int M : config_.scan.M_values) {
    const MomentumDerivativeResult x =
        momentum_derivative_check(sf, config_.window, M, rep.current_value, rep.symmetry_residual);
    CurrentGeometry gm = config_.geometry_for(M + scan_gap(), M);
    gm.strict = false;
    const SumRuleResult sr = sum_rule_check(correlator(), gm, config_.window, rep.current_value, config_.chain, horizon);
    const double consistency =
        std::abs(x.terms.moment - (sr.lhs - x.terms.outer - x.terms.window)) / std::abs(root * x.rhs);
    scan.push_back({{"M", M},
                    {"lhs", x.lhs},
                    {"rel_err", x.rel_err},
                    {"outer", x.terms.outer},
                    {"window", x.terms.window},
                    {"consistency", consistency}});
    decreasing = decreasing && std::abs(x.terms.outer) < prev_outer && std::abs(x.terms.window) < prev_window;
    prev_outer = std::abs(x.terms.outer);
    prev_window = std::abs(x.terms.window);
  }
  j["scan"] = std::move(scan);
  j["boundary_terms_decreasing"] = decreasing;
  write(r, "derivative.json", j.dump(1) + "\n");
  if (!(d.rel_err <= config_.checks.derivative_tol)) r.failed_checks.push_back("derivative");

  json sing = json::parse(singularity_json(singularity_diagnostic(sf, config_.scan.eps_windows)));
  json trend = json::array();
  for (int n : config_.scan.singularity_sizes) {
    ChainConfig c = config_.chain;
    c.n_sites = n;
    spdlog::info("singularity profile on {} sites", n);
    const StationaryState sn = build_biased_gibbs(model_.phi, model_.charge, config_.bias, c);
    const SingularityProfile p =
        singularity_diagnostic(spectral_function_rho(sn, n0, h), config_.scan.eps_windows);
    json fr = json::array();
    for (double f : p.fraction) fr.push_back(std::isnan(f) ? json(nullptr) : json(f));
    trend.push_back({{"n_sites", n}, {"M", p.M}, {"total", p.total}, {"fraction", std::move(fr)}});
  }
  sing["trend"] = std::move(trend);
  write(r, "singularity.json", sing.dump(1) + "\n");
}

}  // namespace nesslab::app
