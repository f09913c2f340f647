#pragma once

#include "mcdl/common.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>

namespace mcdl {

// On-disk layout: 8 magic bytes "MCDLMAT1", uint64 LE rows, uint64 LE cols,
// then rows*cols IEEE-754 binary64 LE values in row-major order.
inline constexpr std::array<char, 8> kMatrixMagic = {'M', 'C', 'D', 'L', 'M', 'A', 'T', '1'};
inline constexpr std::size_t kMatrixHeaderBytes = 24;

void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);

void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

}  // namespace mcdl
