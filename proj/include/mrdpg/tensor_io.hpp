#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "mrdpg/tensor.hpp"

namespace mrdpg::io {

// MRT3 binary layout: "MRT3", version byte 1, three little-endian u32 dims,
// then p1*p2*p3 little-endian IEEE-754 doubles in Tensor3 storage order.
void write_mrt3(std::ostream& out, const Tensor3& t);
Tensor3 read_mrt3(std::istream& in);
void write_mrt3(const std::filesystem::path& path, const Tensor3& t);
Tensor3 read_mrt3(const std::filesystem::path& path);

// CSV triplets "i,j,l,value" with 1-based indices, one row per entry.
// Reading without dims infers them from the largest indices seen; entries
// not listed are zero.
void write_csv(std::ostream& out, const Tensor3& t);
Tensor3 read_csv(std::istream& in, std::optional<Dims3> dims = std::nullopt);

}  // namespace mrdpg::io
