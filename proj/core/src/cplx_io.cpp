// SPDX-License-Identifier: Apache-2.0
#include "cophase/cplx_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace cophase {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'P', 'L', 'X', '1', '\0', '\0', '\0'};

void put_u64(std::ostream& out, std::uint64_t value) {
  std::array<char, 8> bytes{};
  for (std::size_t i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xffU);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw Error("CPLX1: truncated header");
  }
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return value;
}

void put_f64(std::ostream& out, double value) { put_u64(out, std::bit_cast<std::uint64_t>(value)); }

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_cplx1(std::ostream& out, const CMatrix& matrix) {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, static_cast<std::uint64_t>(matrix.rows()));
  put_u64(out, static_cast<std::uint64_t>(matrix.cols()));
  for (Index r = 0; r < matrix.rows(); ++r) {
    for (Index c = 0; c < matrix.cols(); ++c) {
      put_f64(out, matrix(r, c).real());
      put_f64(out, matrix(r, c).imag());
    }
  }
  if (!out) throw Error("CPLX1: write failed");
}

CMatrix read_cplx1(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw Error("CPLX1: bad magic");
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 32;
  if (rows != 0 && cols > kMaxEntries / rows) throw Error("CPLX1: implausible dimensions");
  CMatrix matrix(static_cast<Index>(rows), static_cast<Index>(cols));
  try {
    for (Index r = 0; r < matrix.rows(); ++r) {
      for (Index c = 0; c < matrix.cols(); ++c) {
        const double re = get_f64(in);
        const double im = get_f64(in);
        matrix(r, c) = Complex(re, im);
      }
    }
  } catch (const Error&) {
    throw Error("CPLX1: truncated payload");
  }
  return matrix;
}

void save_cplx1(const std::filesystem::path& path, const CMatrix& matrix) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_cplx1(out, matrix);
}

CMatrix load_cplx1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_cplx1(in);
}

}  // namespace cophase
