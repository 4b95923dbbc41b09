#include "nesslab/interaction.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace nesslab {

namespace {

bool hermitian(const Matrix& m, double tol) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != n) throw ConfigError("matrix is not square");
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& e = row.at(static_cast<std::size_t>(k));
      m(i, k) = cd(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

}  // namespace

Interaction::Interaction(int site_dim, int range) : site_dim_(site_dim), range_(range) {
  if (site_dim < 2) throw PreconditionError("site dimension must be at least 2");
  if (range < 1) throw PreconditionError("interaction range must be positive");
}

void Interaction::add_term(std::vector<int> offsets, const Matrix& m) {
  if (offsets.empty() || offsets.front() != 0) throw PreconditionError("offset set must start at 0");
  for (std::size_t i = 1; i < offsets.size(); ++i)
    if (offsets[i] <= offsets[i - 1]) throw PreconditionError("offset set must be strictly increasing");
  if (offsets.back() > range_) throw PreconditionError("offset set wider than the interaction range");
  // validates the dimension
  LocalOperator check(offsets, m, site_dim_);
  if (!hermitian(m, 1e-12)) throw PreconditionError("interaction term is not Hermitian");
  for (auto& t : terms_)
    if (t.offsets == offsets) {
      t.matrix += m;
      return;
    }
  terms_.push_back({std::move(offsets), m});
}

LocalOperator Interaction::placed(std::size_t term, int anchor) const {
  const auto& t = terms_.at(term);
  std::vector<int> sites(t.offsets);
  for (int& s : sites) s += anchor;
  return LocalOperator(std::move(sites), t.matrix, site_dim_);
}

int Interaction::max_diameter() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.offsets.back());
  return d;
}

void ChargeSpec::validate(int site_dim) const {
  if (n0.rows() != site_dim || n0.cols() != site_dim) throw PreconditionError("charge has wrong dimension");
  if (!hermitian(n0, 1e-12)) throw PreconditionError("charge is not Hermitian");
}

bool ChargeSpec::diagonal() const {
  Matrix off = n0;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() == 0.0 && n0.diagonal().imag().cwiseAbs().maxCoeff() == 0.0;
}

std::string serialize(const Interaction& phi, const ChargeSpec& spec) {
  nlohmann::json j;
  j["site_dim"] = phi.site_dim();
  j["range"] = phi.range();
  j["terms"] = nlohmann::json::array();
  for (const auto& t : phi.terms()) j["terms"].push_back({{"offsets", t.offsets}, {"matrix", matrix_to_json(t.matrix)}});
  j["charge"] = matrix_to_json(spec.n0);
  return j.dump(1);
}

std::pair<Interaction, ChargeSpec> deserialize_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    Interaction phi(j.at("site_dim").get<int>(), j.at("range").get<int>());
    for (const auto& t : j.at("terms")) phi.add_term(t.at("offsets").get<std::vector<int>>(), matrix_from_json(t.at("matrix")));
    ChargeSpec spec{matrix_from_json(j.at("charge"))};
    spec.validate(phi.site_dim());
    return {std::move(phi), std::move(spec)};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model text: ") + e.what());
  }
}

}  // namespace nesslab
