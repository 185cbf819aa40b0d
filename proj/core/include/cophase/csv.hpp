// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace cophase {

/// Shortest-roundtrip-safe rendering: 17 significant digits, "nan"/"inf".
std::string format_double(double value);

}  // namespace cophase
