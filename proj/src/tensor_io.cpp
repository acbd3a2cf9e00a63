#include "mrdpg/tensor_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

#include "mrdpg/error.hpp"

namespace mrdpg::io {

namespace {

constexpr std::array<char, 4> kMagic{'M', 'R', 'T', '3'};
constexpr std::uint8_t kVersion = 1;

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    bytes[b] = static_cast<char>((value >> (8 * b)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw IoError("MRT3: truncated input");
  }
  U value = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) value |= static_cast<U>(bytes[b]) << (8 * b);
  return value;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

void write_mrt3(std::ostream& out, const Tensor3& t) {
  out.write(kMagic.data(), kMagic.size());
  out.put(static_cast<char>(kVersion));
  for (std::size_t d : t.dims()) {
    if (d > UINT32_MAX) throw IoError("MRT3: dimension exceeds 32 bits");
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  }
  for (double v : t.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw IoError("MRT3: write failed");
}

Tensor3 read_mrt3(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw IoError("MRT3: bad magic");
  }
  const int version = in.get();
  if (version != kVersion) throw IoError("MRT3: unsupported version " + std::to_string(version));
  Dims3 dims{};
  for (auto& d : dims) d = get_le<std::uint32_t>(in);
  if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) throw IoError("MRT3: zero dimension");
  std::vector<double> values(dims[0] * dims[1] * dims[2]);
  for (double& v : values) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("MRT3: trailing bytes");
  try {
    return Tensor3(dims, std::move(values));
  } catch (const ConfigError& e) {
    throw IoError(std::string("MRT3: ") + e.what());
  }
}

void write_mrt3(const std::filesystem::path& path, const Tensor3& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_mrt3(out, t);
}

Tensor3 read_mrt3(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_mrt3(in);
}

void write_csv(std::ostream& out, const Tensor3& t) {
  const auto [p1, p2, p3] = t.dims();
  for (std::size_t i = 0; i < p1; ++i)
    for (std::size_t j = 0; j < p2; ++j)
      for (std::size_t l = 0; l < p3; ++l) {
        out << i + 1 << ',' << j + 1 << ',' << l + 1 << ',' << format_double(t(i, j, l)) << '\n';
      }
  if (!out) throw IoError("CSV: write failed");
}

Tensor3 read_csv(std::istream& in, std::optional<Dims3> dims) {
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, double>> rows;
  Dims3 seen{0, 0, 0};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (rows.empty() && line.rfind("i,j,l", 0) == 0) continue;  // optional header
    std::istringstream fields(line);
    std::size_t i = 0, j = 0, l = 0;
    double v = 0.0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(fields >> i >> c1 >> j >> c2 >> l >> c3 >> v) || c1 != ',' || c2 != ',' || c3 != ',' ||
        i == 0 || j == 0 || l == 0) {
      throw IoError("CSV: malformed row at line " + std::to_string(line_no));
    }
    seen = {std::max(seen[0], i), std::max(seen[1], j), std::max(seen[2], l)};
    rows.emplace_back(i - 1, j - 1, l - 1, v);
  }
  const Dims3 shape = dims.value_or(seen);
  if (shape[0] == 0 || shape[1] == 0 || shape[2] == 0) throw IoError("CSV: no entries");
  if (seen[0] > shape[0] || seen[1] > shape[1] || seen[2] > shape[2]) {
    throw IoError("CSV: index outside the declared dimensions");
  }
  Tensor3 t(shape);
  for (const auto& [i, j, l, v] : rows) t(i, j, l) = v;
  return t;
}

}  // namespace mrdpg::io
