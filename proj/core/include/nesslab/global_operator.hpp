#pragma once

#include "nesslab/chain.hpp"
#include "nesslab/local_operator.hpp"
#include "nesslab/types.hpp"

namespace nesslab {

/// op tensored with the identity on the rest of the chain.
GlobalOperator embed(const LocalOperator& op, const ChainConfig& chain);

GlobalOperator commutator(const GlobalOperator& a, const GlobalOperator& b);
double comm_norm(const GlobalOperator& a, const GlobalOperator& b);

/// Largest singular value. Hermitian and anti-Hermitian inputs go through
/// the eigenvalue solver.
double operator_norm(const Matrix& a);

/// Unitary T with T embed(A) T^dagger = embed(translate(A, 1)) on a periodic chain.
GlobalOperator shift_unitary(const ChainConfig& chain);

/// Basis index of the translated product state.
std::uint64_t shift_index(std::uint64_t s, const ChainConfig& chain);

}  // namespace nesslab
