// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <cstring>
#include <limits>
#include <sstream>

#include "cophase/cplx_io.hpp"
#include "cophase/csv.hpp"
#include "oracles.hpp"

using namespace cophase;

TEST(Cplx1, HeaderLayoutIsLittleEndian) {
  CMatrix m(1, 2);
  m << Complex(1.0, -2.0), Complex(0.5, 0.25);
  std::ostringstream out;
  write_cplx1(out, m);
  const std::string bytes = out.str();
  ASSERT_EQ(bytes.size(), 8u + 16u + 2u * 16u);
  EXPECT_EQ(bytes.substr(0, 8), std::string("CPLX1\0\0\0", 8));
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1u);   // rows, low byte first
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 2u);  // cols
  // 1.0 = 0x3FF0000000000000: the high byte is last.
  EXPECT_EQ(static_cast<unsigned char>(bytes[24 + 7]), 0x3Fu);
  EXPECT_EQ(static_cast<unsigned char>(bytes[24 + 6]), 0xF0u);
}

TEST(Cplx1, RoundTripIsBitExact) {
  const CMatrix m = oracle::gaussian(7, 3, 1);
  std::stringstream io;
  write_cplx1(io, m);
  const CMatrix back = read_cplx1(io);
  ASSERT_EQ(back.rows(), 7);
  ASSERT_EQ(back.cols(), 3);
  EXPECT_EQ(back, m);
}

TEST(Cplx1, RowMajorPayload) {
  CMatrix m(2, 2);
  m << Complex(1, 0), Complex(2, 0), Complex(3, 0), Complex(4, 0);
  std::ostringstream out;
  write_cplx1(out, m);
  const std::string bytes = out.str();
  double second = 0.0;
  std::memcpy(&second, bytes.data() + 24 + 16, sizeof(double));
  EXPECT_EQ(second, 2.0);
}

TEST(Cplx1, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "cophase_test_roundtrip.cplx1";
  const CMatrix m = oracle::gaussian(4, 4, 2);
  save_cplx1(path, m);
  EXPECT_EQ(load_cplx1(path), m);
  std::filesystem::remove(path);
}

TEST(Cplx1, RejectsBadMagic) {
  std::istringstream in(std::string("CPLX2\0\0\0", 8) + std::string(16, '\0'));
  EXPECT_THROW(read_cplx1(in), Error);
}

TEST(Cplx1, RejectsTruncatedPayload) {
  std::ostringstream out;
  write_cplx1(out, oracle::gaussian(3, 3, 3));
  std::string bytes = out.str();
  bytes.resize(bytes.size() - 5);
  std::istringstream in(bytes);
  EXPECT_THROW(read_cplx1(in), Error);
}

TEST(Cplx1, RejectsTruncatedHeader) {
  std::istringstream in(std::string("CPLX1\0\0\0\1", 9));
  EXPECT_THROW(read_cplx1(in), Error);
}

TEST(Cplx1, MissingFile) { EXPECT_THROW(load_cplx1("/nonexistent/dir/file.cplx1"), Error); }

TEST(Csv, SeventeenSignificantDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  const double v = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(v)), v);
}
