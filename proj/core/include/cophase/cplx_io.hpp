// SPDX-License-Identifier: Apache-2.0
//
// CPLX1 binary matrix format: 8-byte magic "CPLX1\0\0\0", u64 rows, u64 cols
// (little-endian), then rows*cols row-major entries stored as interleaved
// little-endian float64 (real, imag).
#pragma once

#include <filesystem>
#include <iosfwd>

#include "cophase/types.hpp"

namespace cophase {

void write_cplx1(std::ostream& out, const CMatrix& matrix);
CMatrix read_cplx1(std::istream& in);

void save_cplx1(const std::filesystem::path& path, const CMatrix& matrix);
CMatrix load_cplx1(const std::filesystem::path& path);

}  // namespace cophase
