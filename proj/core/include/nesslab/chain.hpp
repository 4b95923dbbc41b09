#pragma once

#include <cstdint>
#include <string_view>

namespace nesslab {

enum class Boundary { periodic, open };

std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

/// Finite chain surrogate of the two-way infinite lattice.
struct ChainConfig {
  static constexpr std::uint64_t default_dim_cap = std::uint64_t{1} << 14;

  int n_sites = 2;
  int site_dim = 2;
  Boundary boundary = Boundary::periodic;
  std::uint64_t dim_cap = default_dim_cap;

  /// Throws PreconditionError unless n_sites >= 2, site_dim >= 2 and the
  /// Hilbert-space dimension fits under dim_cap.
  void validate() const;

  std::uint64_t dimension() const;
  bool periodic() const { return boundary == Boundary::periodic; }

  /// Reduce a site label to [0, n_sites). Open chains reject labels outside
  /// that range.
  int wrap(long long site) const;
};

/// Integer power with overflow saturation at UINT64_MAX.
std::uint64_t ipow(std::uint64_t base, int exp);

}  // namespace nesslab
