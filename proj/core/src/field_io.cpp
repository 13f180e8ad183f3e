#include "nlagg/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace nlagg {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'A', 'G', 'G', 'F', 'L', 'D'};

template <class T>
void put_le(std::vector<unsigned char>& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

template <class T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<U>(p[b]) << (8 * b);
  return std::bit_cast<T>(bits);
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  NLAGG_REQUIRE(os.good(), ErrorKind::Io, "cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  NLAGG_REQUIRE(os.good(), ErrorKind::Io, "write failed for " + path.string());
}

std::vector<unsigned char> header(const Domain& d, FieldKind kind) {
  std::vector<unsigned char> out(kMagic, kMagic + 8);
  put_le(out, static_cast<std::uint32_t>(d.nx));
  put_le(out, static_cast<std::uint32_t>(d.ny));
  put_le(out, d.lx);
  put_le(out, d.ly);
  put_le(out, static_cast<std::uint32_t>(kind));
  return out;
}

void append_values(std::vector<unsigned char>& out, std::span<const double> values) {
  for (double v : values) put_le(out, v);
}

std::vector<double> read_values(const unsigned char* p, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = get_le<double>(p + 8 * k);
  return v;
}

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& f, FieldKind kind) {
  NLAGG_REQUIRE(kind != FieldKind::Vector, ErrorKind::InvalidArgument,
                "scalar data cannot carry the vector kind tag");
  auto bytes = header(f.domain(), kind);
  append_values(bytes, f.values());
  write_bytes(path, bytes);
}

void write_field(const std::filesystem::path& path, const VectorField& v) {
  auto bytes = header(v.domain(), FieldKind::Vector);
  append_values(bytes, v.xs());
  append_values(bytes, v.ys());
  write_bytes(path, bytes);
}

FieldFile read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  NLAGG_REQUIRE(is.good(), ErrorKind::Io, "cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                         std::istreambuf_iterator<char>());
  NLAGG_REQUIRE(bytes.size() >= kFieldHeaderBytes, ErrorKind::SizeMismatch,
                path.string() + ": shorter than the field header");
  NLAGG_REQUIRE(std::memcmp(bytes.data(), kMagic, 8) == 0, ErrorKind::CorruptHeader,
                path.string() + ": bad magic");

  const auto nx = get_le<std::uint32_t>(bytes.data() + 8);
  const auto ny = get_le<std::uint32_t>(bytes.data() + 12);
  const auto lx = get_le<double>(bytes.data() + 16);
  const auto ly = get_le<double>(bytes.data() + 24);
  const auto tag = get_le<std::uint32_t>(bytes.data() + 32);
  NLAGG_REQUIRE(tag >= 1 && tag <= 3, ErrorKind::CorruptHeader,
                path.string() + ": unknown kind tag " + std::to_string(tag));

  Domain d;
  try {
    d = Domain::make(static_cast<int>(nx), static_cast<int>(ny), lx, ly);
  } catch (const Error& e) {
    throw Error(ErrorKind::CorruptHeader, path.string() + ": " + e.what());
  }
  const auto kind = static_cast<FieldKind>(tag);
  const std::size_t count = kind == FieldKind::Vector ? d.x_faces() + d.y_faces() : d.cells();
  NLAGG_REQUIRE(bytes.size() == kFieldHeaderBytes + 8 * count, ErrorKind::SizeMismatch,
                path.string() + ": expected " + std::to_string(kFieldHeaderBytes + 8 * count) +
                    " bytes, found " + std::to_string(bytes.size()));

  const unsigned char* payload = bytes.data() + kFieldHeaderBytes;
  if (kind == FieldKind::Vector) {
    auto xs = read_values(payload, d.x_faces());
    auto ys = read_values(payload + 8 * d.x_faces(), d.y_faces());
    return {kind, VectorField(d, std::move(xs), std::move(ys))};
  }
  return {kind, ScalarField(d, read_values(payload, d.cells()))};
}

ScalarField read_scalar_field(const std::filesystem::path& path) {
  FieldFile f = read_field(path);
  NLAGG_REQUIRE(f.kind != FieldKind::Vector, ErrorKind::CorruptHeader,
                path.string() + ": expected a scalar field");
  return std::get<ScalarField>(std::move(f.field));
}

VectorField read_vector_field(const std::filesystem::path& path) {
  FieldFile f = read_field(path);
  NLAGG_REQUIRE(f.kind == FieldKind::Vector, ErrorKind::CorruptHeader,
                path.string() + ": expected a vector field");
  return std::get<VectorField>(std::move(f.field));
}

}  // namespace nlagg
