#include "mcdl/matrix_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace mcdl {
namespace {

static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

void put_u64(std::ostream& out, std::uint64_t value) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(const unsigned char* bytes) {
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return value;
}

std::uint64_t remaining_bytes(std::istream& in) {
  const auto here = in.tellg();
  if (here < 0) return std::numeric_limits<std::uint64_t>::max();
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(here);
  if (end < here) return 0;
  return static_cast<std::uint64_t>(end - here);
}

}  // namespace

void write_matrix(std::ostream& out, const Matrix& m) {
  out.write(kMatrixMagic.data(), static_cast<std::streamsize>(kMatrixMagic.size()));
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  std::vector<unsigned char> row(static_cast<std::size_t>(m.cols()) * 8);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      const auto bits = std::bit_cast<std::uint64_t>(m(r, c));
      for (int i = 0; i < 8; ++i) {
        row[static_cast<std::size_t>(c) * 8 + static_cast<std::size_t>(i)] =
            static_cast<unsigned char>(bits >> (8 * i));
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) fail(ErrorCode::io_failure, "failed writing matrix payload");
}

Matrix read_matrix(std::istream& in) {
  unsigned char header[kMatrixHeaderBytes];
  in.read(reinterpret_cast<char*>(header), static_cast<std::streamsize>(kMatrixHeaderBytes));
  if (in.gcount() < static_cast<std::streamsize>(kMatrixMagic.size()) ||
      std::memcmp(header, kMatrixMagic.data(), kMatrixMagic.size()) != 0) {
    fail(ErrorCode::bad_magic, "matrix file does not start with MCDLMAT1");
  }
  if (in.gcount() < static_cast<std::streamsize>(kMatrixHeaderBytes)) {
    fail(ErrorCode::truncated_payload, "matrix header is incomplete");
  }
  const std::uint64_t rows = get_u64(header + 8);
  const std::uint64_t cols = get_u64(header + 16);
  constexpr auto kMaxIndex = static_cast<std::uint64_t>(std::numeric_limits<Index>::max());
  if (rows > kMaxIndex || cols > kMaxIndex ||
      (cols != 0 && rows > std::numeric_limits<std::uint64_t>::max() / 8 / cols)) {
    fail(ErrorCode::dimension_overflow, "matrix header declares " + std::to_string(rows) + "x" +
                                            std::to_string(cols) + " entries");
  }
  const std::uint64_t payload = rows * cols * 8;
  if (remaining_bytes(in) < payload) {
    fail(ErrorCode::truncated_payload, "matrix header declares " + std::to_string(rows) + "x" +
                                           std::to_string(cols) + " but the payload is shorter");
  }
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  std::vector<unsigned char> row(static_cast<std::size_t>(cols) * 8);
  for (Index r = 0; r < m.rows(); ++r) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (in.gcount() != static_cast<std::streamsize>(row.size())) {
      fail(ErrorCode::truncated_payload, "matrix payload ended early");
    }
    for (Index c = 0; c < m.cols(); ++c) {
      m(r, c) = std::bit_cast<double>(get_u64(row.data() + static_cast<std::size_t>(c) * 8));
    }
  }
  return m;
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_failure, "cannot open " + path.string() + " for writing");
  write_matrix(out, m);
  out.close();
  if (!out) fail(ErrorCode::io_failure, "failed writing " + path.string());
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_failure, "cannot open " + path.string());
  try {
    return read_matrix(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace mcdl
