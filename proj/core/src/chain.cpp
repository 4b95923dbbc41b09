#include "nesslab/chain.hpp"

#include <limits>
#include <string>

#include "nesslab/types.hpp"

namespace nesslab {

std::string_view to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "open"; }

Boundary boundary_from_string(std::string_view s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "open") return Boundary::open;
  throw ConfigError("unknown boundary '" + std::string(s) + "' (expected periodic or open)");
}

std::uint64_t ipow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    r *= base;
  }
  return r;
}

void ChainConfig::validate() const {
  if (n_sites < 2) throw PreconditionError("n_sites must be >= 2");
  if (site_dim < 2) throw PreconditionError("site_dim must be >= 2");
  if (dimension() > dim_cap) {
    throw PreconditionError("Hilbert-space dimension " + std::to_string(site_dim) + "^" +
                            std::to_string(n_sites) + " exceeds cap " + std::to_string(dim_cap));
  }
}

std::uint64_t ChainConfig::dimension() const {
  return ipow(static_cast<std::uint64_t>(site_dim), n_sites);
}

int ChainConfig::wrap(long long site) const {
  if (periodic()) {
    long long m = site % n_sites;
    if (m < 0) m += n_sites;
    return static_cast<int>(m);
  }
  if (site < 0 || site >= n_sites) {
    throw PreconditionError("site " + std::to_string(site) + " outside open chain of " +
                            std::to_string(n_sites) + " sites");
  }
  return static_cast<int>(site);
}

}  // namespace nesslab
