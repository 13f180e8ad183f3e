#pragma once

// Binary field snapshots.
//
// Layout (all little-endian):
//   bytes  0..7   magic "NLAGGFLD"
//   bytes  8..11  u32 nx
//   bytes 12..15  u32 ny
//   bytes 16..23  f64 lx
//   bytes 24..31  f64 ly
//   bytes 32..35  u32 kind tag
//   payload       f64 values, row-major (x fastest). Vector fields store the
//                 (nx+1)*ny x-faces followed by the nx*(ny+1) y-faces.

#include <cstdint>
#include <filesystem>
#include <variant>

#include "nlagg/grid.hpp"

namespace nlagg {

enum class FieldKind : std::uint32_t { Scalar = 1, Pressure = 2, Vector = 3 };

inline constexpr std::size_t kFieldHeaderBytes = 36;

void write_field(const std::filesystem::path& path, const ScalarField& f,
                 FieldKind kind = FieldKind::Scalar);
void write_field(const std::filesystem::path& path, const VectorField& v);

using AnyField = std::variant<ScalarField, VectorField>;

struct FieldFile {
  FieldKind kind;
  AnyField field;
};

/// Throws CorruptHeader on a bad magic or unknown kind, SizeMismatch when the
/// payload length disagrees with the header.
FieldFile read_field(const std::filesystem::path& path);
ScalarField read_scalar_field(const std::filesystem::path& path);
VectorField read_vector_field(const std::filesystem::path& path);

}  // namespace nlagg
