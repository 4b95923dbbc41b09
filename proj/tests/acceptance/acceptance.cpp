// Acceptance suite: one PASS/FAIL line per criterion. Exits 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "nesslab/global_operator.hpp"
#include "nesslab/spectral.hpp"
#include "nesslab_app/config.hpp"
#include "nesslab_app/pipeline.hpp"
#include "oracle.hpp"

using namespace nesslab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %2d %-22s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), sec);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_of(const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ChainConfig ring(int n) { return {n, 2, Boundary::periodic}; }

app::ExperimentConfig acceptance_config() {
  return app::load_config(fs::path(NESSLAB_SOURCE_DIR) / "tools/configs/acceptance.ini", false);
}

Interaction random_interaction(int r, std::mt19937_64& rng) {
  Interaction phi(2, r);
  phi.add_term({0}, oracle::random_hermitian(2, rng));
  phi.add_term({0, 1}, oracle::random_hermitian(4, rng));
  if (r >= 2) phi.add_term({0, 1, 2}, oracle::random_hermitian(8, rng));
  if (r >= 3) phi.add_term({0, 2, 3}, oracle::random_hermitian(8, rng));
  return phi;
}

Outcome conservation() {
  const std::vector<double> v{0.5};
  const std::vector<std::pair<std::string, Model>> models = {{"xx", build_xxz_model(0.0)},
                                                             {"xxz0.5", build_xxz_model(0.5)},
                                                             {"xxz1", build_xxz_model(1.0)},
                                                             {"fermion", build_fermion_model(1.0, v)}};
  double worst = 0.0;
  const double sec = seconds_of([&] {
    for (const auto& [name, m] : models) worst = std::max(worst, check_conservation(m.phi, m.charge, ring(10), 8));
  });
  return {worst <= 1e-12 && sec < 10.0, fmt("max residual %.3g", worst) + fmt(", %.2fs", sec)};
}

Outcome current_identity() {
  ChainConfig chain = ring(20);
  chain.dim_cap = std::uint64_t{1} << 20;
  const Model xx = build_xxz_model(0.0);
  const LocalOperator xx_ref = -1.0 * LocalOperator::product({{0, spin::s(2)}, {1, spin::s(1)}}) +
                               LocalOperator::product({{0, spin::s(1)}, {1, spin::s(2)}});
  const double t = 1.0;
  const std::vector<double> v{0.5};
  const Model fe = build_fermion_model(t, v);
  const Matrix a = fermion::annihilate();
  const LocalOperator c0 = LocalOperator::product({{0, a}, {1, Matrix::Identity(2, 2)}});
  const LocalOperator c1 = LocalOperator::product({{0, spin::sigma(3)}, {1, a}});
  const LocalOperator fe_ref = cd(0.0, t) * (c1.adjoint() * c0 - c0.adjoint() * c1);
  double closed = 0.0, invariance = 0.0;
  for (const auto& [m, ref] : {std::pair{&xx, &xx_ref}, std::pair{&fe, &fe_ref}}) {
    const LocalOperator g1 = current_operator(m->phi, m->charge, {7, 3, 1, true}, chain);
    const LocalOperator g2 = current_operator(m->phi, m->charge, {9, 4, 1, true}, chain);
    closed = std::max(closed, max_abs_diff(g1, *ref));
    invariance = std::max(invariance, max_abs_diff(g1, g2));
  }
  return {closed <= 1e-12 && invariance <= 1e-12,
          fmt("closed form %.3g", closed) + fmt(", geometry spread %.3g", invariance)};
}

Outcome lieb_robinson(const fs::path& dir) {
  app::RunResult r;
  const double sec = seconds_of([&] { r = app::Pipeline(acceptance_config(), dir).run(app::Subcommand::verify_lr); });
  const json j = json::parse(slurp(dir / "lr_report.json"));
  const int points = j["points"].get<int>(), excluded = j["excluded"].get<int>(), viol = j["violations"].get<int>();
  return {viol == 0 && points > excluded && sec < 120.0,
          std::to_string(viol) + " violations over " + std::to_string(points - excluded) + " points" +
              fmt(", %.1fs", sec)};
}

Outcome telescoping() {
  std::mt19937_64 rng(20240611);
  const int M = 4;
  const ChainConfig chain = ring(12);
  double worst = 0.0;
  bool supports = true;
  for (int r = 1; r <= 3; ++r) {
    const Interaction phi = random_interaction(r, rng);
    const LocalOperator h = energy_density(phi).h;
    const BoundaryTerms b = boundary_terms(phi, M);
    LocalOperator sum = b.c_minus + b.c_plus;
    for (int y = -M + r; y <= M - r; ++y) sum += shift(h, y);
    const Matrix lhs = embed(place_on_chain(window_hamiltonian(phi, -M, M), chain, 6), chain);
    const Matrix rhs = embed(place_on_chain(sum, chain, 6), chain);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    const LocalOperator cm = reduce_support(b.c_minus), cp = reduce_support(b.c_plus);
    if (!cm.support().empty()) supports = supports && cm.min_site() >= -M && cm.max_site() <= -M + 2 * r;
    if (!cp.support().empty()) supports = supports && cp.min_site() >= M - 2 * r && cp.max_site() <= M;
  }
  return {worst <= 1e-12 && supports, fmt("max deviation %.3g", worst) + (supports ? "" : ", boundary support wrong")};
}

Outcome ness() {
  const int n = 10;
  const Model m = build_xxz_model(0.0);
  BiasSpec b;
  b.beta = 1.0;
  b.lambda = 0.5;
  const StationaryState s = build_biased_gibbs(m.phi, m.charge, b, ring(n));
  const VerificationReport rep = verify_ness(s, m.phi, m.charge, {6, 3, 1, true});
  b.lambda = -0.5;
  const StationaryState sm = build_biased_gibbs(m.phi, m.charge, b, ring(n));
  const double jm = expectation(sm, current_density(m.phi, m.charge)).real();
  const oracle::Mat rho = oracle::biased_gibbs(oracle::xxz_ring(n, 0.0), oracle::xx_total_current(n), 1.0, 0.5);
  const double ref = (rho * oracle::xx_current(0, n)).trace().real();
  const double j = rep.current_value;
  const bool ok = rep.stationarity_residual <= 1e-10 && rep.translation_residual <= 1e-10 && std::abs(j) > 1e-3 &&
                  std::abs(j - ref) <= 1e-8 && std::abs(j + jm) <= 1e-10;
  return {ok, fmt("omega(j0) %.10f", j) + fmt(", oracle diff %.3g", std::abs(j - ref)) +
                  fmt(", odd %.3g", std::abs(j + jm)) + fmt(", residuals %.3g", rep.stationarity_residual) +
                  fmt("/%.3g", rep.translation_residual)};
}

Outcome flatness(const fs::path& dir) {
  std::ifstream in(dir / "flatness.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0, bad = 0;
  double tmax = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<double> f;
    for (std::string cell; f.size() < 4 && std::getline(ss, cell, ',');) f.push_back(std::stod(cell));
    ++rows;
    tmax = std::max(tmax, f.at(0));
    if (!(f.at(2) <= f.at(3) + 1e-12)) ++bad;
  }
  return {rows > 0 && bad == 0 && tmax >= 1.0,
          std::to_string(bad) + " of " + std::to_string(rows) + " samples above the bound"};
}

Outcome sum_rule(double sec, const fs::path& dir) {
  const json j = json::parse(slurp(dir / "sumrule.json"));
  const double rel = j["rel_err"].get<double>();
  const bool improving = j["scan_strictly_improving"].get<bool>();
  std::string scan;
  for (const auto& row : j["scan"]) scan += fmt(" %.4g", row["rel_err"].get<double>());
  return {rel <= 0.05 && improving && sec < 300.0,
          fmt("rel_err %.4g", rel) + ", scan over M:" + scan + (improving ? " (improving)" : " (not improving)") +
              fmt(", %.1fs", sec)};
}

Outcome derivative(const fs::path& dir) {
  const json j = json::parse(slurp(dir / "derivative.json"));
  const double rel = j["rel_err"].get<double>(), sym = j["symmetry_residual"].get<double>();
  const bool decreasing = j["boundary_terms_decreasing"].get<bool>();
  bool rejects = false;
  SpectralFunction empty;
  empty.table.n_sites = 12;
  try {
    momentum_derivative_check(empty, WindowFunction{}, 3, 1.0, 1e-3);
  } catch (const PreconditionError&) {
    rejects = true;
  }
  return {sym <= 1e-10 && rejects && rel <= 0.1 && decreasing,
          fmt("rel_err %.4g", rel) + fmt(", symmetry residual %.3g", sym) +
              (decreasing ? ", boundary terms decrease" : ", boundary terms do not decrease") +
              (rejects ? "" : ", broken-symmetry branch not rejected")};
}

Outcome singularity(const fs::path& dir) {
  const json j = json::parse(slurp(dir / "singularity.json"));
  const auto cfg = acceptance_config();
  std::size_t k = 0;
  while (k < cfg.scan.eps_windows.size() && cfg.scan.eps_windows[k] != 0.2) ++k;
  if (k == cfg.scan.eps_windows.size()) return {false, "eps 0.2 not in the configured windows"};
  bool ok = true;
  double prev = -INFINITY;
  std::string trend;
  for (const auto& row : j["trend"]) {
    const auto& f = row["fraction"][k];
    if (f.is_null()) return {false, "no current"};
    const double v = f.get<double>();
    trend += " " + std::to_string(row["n_sites"].get<int>()) + ":" + fmt("%.4f", v);
    ok = ok && v >= prev;
    prev = v;
  }
  return {ok, "fraction at eps 0.2 by ring size" + trend};
}

Outcome determinism(const fs::path& a, const fs::path& b) {
  int compared = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const fs::path other = b / e.path().filename();
    ++compared;
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differ;
  }
  int count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count_b;
  return {compared > 0 && differ == 0 && count_b == compared,
          std::to_string(compared) + " artifacts, " + std::to_string(differ) + " differ"};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const fs::path root = fs::current_path() / "acceptance_out";
  fs::remove_all(root);

  report(1, "conservation", conservation);
  report(2, "current identity", current_identity);
  report(3, "lieb-robinson", [&] { return lieb_robinson(root / "lr"); });
  report(4, "telescoping", telescoping);
  report(5, "ness", ness);

  // Sum rule timing is taken on a fresh pipeline so that it includes the state.
  double sumrule_sec = 0.0;
  bool first_run_ok = true;
  try {
    sumrule_sec = seconds_of([&] { app::Pipeline(acceptance_config(), root / "sumrule").run(app::Subcommand::sumrule); });
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sumrule run failed: %s\n", e.what());
    first_run_ok = false;
  }
  try {
    app::Pipeline(acceptance_config(), root / "all_a").run(app::Subcommand::all);
    app::Pipeline(acceptance_config(), root / "all_b").run(app::Subcommand::all);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "all run failed: %s\n", e.what());
  }

  report(6, "flatness", [&] { return flatness(root / "all_a"); });
  report(7, "sum rule", [&] {
    if (!first_run_ok) return Outcome{false, "sumrule run failed"};
    return sum_rule(sumrule_sec, root / "sumrule");
  });
  report(8, "momentum derivative", [&] { return derivative(root / "all_a"); });
  report(9, "singularity trend", [&] { return singularity(root / "all_a"); });
  report(10, "determinism", [&] { return determinism(root / "all_a", root / "all_b"); });

  if (std::getenv("NESSLAB_ACCEPTANCE_EXTENDED")) {
    // sum rule scan on a larger ring; informational, not counted
    auto cfg = acceptance_config();
    cfg.chain.n_sites = 14;
    const int before = failures;
    report(7, "sum rule (14 sites)", [&] {
      double sec = seconds_of([&] { app::Pipeline(cfg, root / "sumrule14").run(app::Subcommand::sumrule); });
      return sum_rule(sec, root / "sumrule14");
    });
    failures = before;
  }

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
