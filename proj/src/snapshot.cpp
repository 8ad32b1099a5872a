#include "dnls/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <type_traits>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

constexpr char kMagic[4] = {'L', 'D', 'S', 'F'};

template <class T>
void put_le(std::vector<unsigned char>& out, T value) {
  std::uint64_t bits;
  if constexpr (std::is_same_v<T, double>)
    bits = std::bit_cast<std::uint64_t>(value);
  else
    bits = static_cast<std::uint64_t>(value);
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw LengthMismatch("snapshot ends inside the header");
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<std::uint64_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>)
      return std::bit_cast<double>(bits);
    else
      return static_cast<T>(bits);
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> encode_field(const State& U) {
  const Grid& g = U.grid();
  const int d = g.dim();
  std::vector<unsigned char> out(kMagic, kMagic + 4);
  out.reserve(4 + 8 + 16 * static_cast<std::size_t>(d) + 3 * static_cast<std::size_t>(d) * g.size() * 16);
  put_le<std::uint32_t>(out, kFieldFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  for (int k = 0; k < d; ++k) put_le<std::uint64_t>(out, g.points(k));
  for (int k = 0; k < d; ++k) put_le<double>(out, g.extent(k));
  U.for_each_component([&](int, int, const ScalarField& f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      put_le<double>(out, f[i].real());
      put_le<double>(out, f[i].imag());
    }
  });
  return out;
}

State decode_field(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("missing LDSF magic bytes");
  Reader r(bytes);
  r.get<std::uint32_t>();
  const auto version = r.get<std::uint32_t>();
  if (version != kFieldFormatVersion)
    throw UnsupportedVersion("field format version " + std::to_string(version) + " (supported: " +
                             std::to_string(kFieldFormatVersion) + ")");
  const auto d = r.get<std::uint32_t>();
  if (d < 1 || d > 3) throw FormatError("dimension " + std::to_string(d) + " outside 1..3");
  std::array<std::size_t, 3> n{1, 1, 1};
  Vec3 extent{1, 1, 1};
  for (std::uint32_t k = 0; k < d; ++k) {
    n[k] = r.get<std::uint64_t>();
    if (n[k] > (std::size_t{1} << 24)) throw FormatError("axis " + std::to_string(k) + " has an implausible point count");
  }
  for (std::uint32_t k = 0; k < d; ++k) extent[k] = r.get<double>();
  std::optional<Grid> grid;
  try {
    grid.emplace(static_cast<int>(d), n, extent);
  } catch (const InvalidGrid& e) {
    throw FormatError(std::string("invalid grid in header: ") + e.what());
  }
  const std::size_t expected = 3 * static_cast<std::size_t>(d) * grid->size() * 16;
  if (bytes.size() - r.pos() != expected)
    throw LengthMismatch("payload has " + std::to_string(bytes.size() - r.pos()) + " bytes, expected " +
                         std::to_string(expected));
  State U(*grid);
  U.for_each_component([&](int, int, ScalarField& f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double re = r.get<double>();
      const double im = r.get<double>();
      f[i] = cplx(re, im);
    }
  });
  return U;
}

void save_field(const State& U, const std::string& path) {
  const auto bytes = encode_field(U);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

State load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_field(bytes);
}

}  // namespace dnls
