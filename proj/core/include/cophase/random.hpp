// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "cophase/types.hpp"

namespace cophase {

using Rng = std::mt19937_64;

/// Derives a child seed from a parent seed and two stream indices.
/// Counter-based (splitmix64 finalizer), so trial seeds do not depend on
/// evaluation order.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Entries with independent standard-normal real and imaginary parts.
CVector complex_gaussian_vector(Index n, Rng& rng);
CMatrix complex_gaussian_matrix(Index rows, Index cols, Rng& rng);

}  // namespace cophase
