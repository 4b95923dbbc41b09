#pragma once

#include <string>
#include <vector>

#include "nesslab/local_operator.hpp"
#include "nesslab/types.hpp"

namespace nesslab {

struct InteractionTerm {
  std::vector<int> offsets;  // canonical: sorted, starts at 0
  Matrix matrix;             // Hermitian, site_dim^|offsets|
};

/// Translation-invariant finite-range interaction given by one term per
/// translation class of site sets.
class Interaction {
 public:
  Interaction(int site_dim, int range);

  /// Adds Phi(X); a set already present is accumulated into.
  void add_term(std::vector<int> offsets, const Matrix& m);

  int site_dim() const { return site_dim_; }
  int range() const { return range_; }
  const std::vector<InteractionTerm>& terms() const { return terms_; }

  /// Phi(X + anchor) as a local operator.
  LocalOperator placed(std::size_t term, int anchor) const;

  /// Largest diameter actually present.
  int max_diameter() const;

 private:
  int site_dim_;
  int range_;
  std::vector<InteractionTerm> terms_;
};

/// Single-site charge n_0.
struct ChargeSpec {
  Matrix n0;
  void validate(int site_dim) const;
  bool diagonal() const;
};

/// JSON text of an interaction with its charge; doubles are written with
/// round-trip precision.
std::string serialize(const Interaction& phi, const ChargeSpec& spec);
std::pair<Interaction, ChargeSpec> deserialize_model(const std::string& text);

}  // namespace nesslab
