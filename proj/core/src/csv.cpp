// SPDX-License-Identifier: Apache-2.0
#include "cophase/csv.hpp"

#include <cmath>

#include <fmt/format.h>

namespace cophase {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", value);
}

}  // namespace cophase
