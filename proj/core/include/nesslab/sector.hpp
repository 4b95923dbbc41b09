#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "nesslab/chain.hpp"
#include "nesslab/local_operator.hpp"
#include "nesslab/types.hpp"

namespace nesslab {

/// A local operator compiled for application to computational basis states
/// of a chain.
class SiteAction {
 public:
  SiteAction(const LocalOperator& op, const ChainConfig& chain);

  /// Calls emit(target_state, amplitude) for every nonzero <target|op|state>.
  template <class F>
  void apply(std::uint64_t state, F&& emit) const {
    std::uint64_t local = 0, rest = state;
    for (std::size_t k = 0; k < strides_.size(); ++k) {
      const std::uint64_t digit = (state / strides_[k]) % d_;
      local += digit * local_strides_[k];
      rest -= digit * strides_[k];
    }
    const auto begin = col_start_[local], end = col_start_[local + 1];
    for (auto e = begin; e < end; ++e) emit(rest + targets_[e], values_[e]);
  }

 private:
  std::uint64_t d_;
  std::vector<std::uint64_t> strides_;        // d^site per support site
  std::vector<std::uint64_t> local_strides_;  // d^k
  std::vector<std::size_t> col_start_;        // CSC column pointers of the local matrix
  std::vector<std::uint64_t> targets_;        // global offset of each row index
  std::vector<cd> values_;
};

/// Sum of local operators acting on a chain.
class OperatorSum {
 public:
  OperatorSum() = default;
  explicit OperatorSum(const ChainConfig& chain) : chain_(chain) {}

  void add(const LocalOperator& op);
  const std::vector<SiteAction>& terms() const { return terms_; }
  const ChainConfig& chain() const { return chain_; }
  bool empty() const { return terms_.empty(); }

  template <class F>
  void apply(std::uint64_t state, F&& emit) const {
    for (const auto& t : terms_) t.apply(state, emit);
  }

  /// Full matrix; intended for small chains.
  GlobalOperator dense() const;

 private:
  ChainConfig chain_;
  std::vector<SiteAction> terms_;
};

/// Partition of the computational basis by eigenvalue of a diagonal total
/// charge. With no charge given there is a single sector.
class ChargeSectors {
 public:
  static ChargeSectors build(const ChainConfig& chain, const std::optional<Matrix>& n0, double tol = 1e-9);

  int count() const { return static_cast<int>(states_.size()); }
  double charge(int sector) const { return charges_[static_cast<std::size_t>(sector)]; }
  const std::vector<std::uint64_t>& states(int sector) const { return states_[static_cast<std::size_t>(sector)]; }
  int sector_of(std::uint64_t state) const { return sector_of_[state]; }
  Eigen::Index position(std::uint64_t state) const { return position_[state]; }
  bool resolved() const { return resolved_; }

 private:
  std::vector<double> charges_;
  std::vector<std::vector<std::uint64_t>> states_;
  std::vector<int> sector_of_;
  std::vector<Eigen::Index> position_;
  bool resolved_ = false;
};

/// Operator stored as dense blocks between sectors, keyed by (row, col).
struct SectorMatrix {
  std::map<std::pair<int, int>, Matrix> blocks;

  /// Product-basis blocks of an operator sum.
  static SectorMatrix from_sum(const OperatorSum& op, const ChargeSectors& sectors);

  bool block_diagonal() const;
  double norm() const;
};

/// Largest singular value of a block-structured operator; connected
/// components of the block pattern are assembled and treated separately.
double block_operator_norm(const std::map<std::pair<int, int>, Matrix>& blocks);

}  // namespace nesslab
