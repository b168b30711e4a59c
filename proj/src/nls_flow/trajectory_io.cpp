#include "nlslab/trajectory_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "nlslab/errors.hpp"

namespace nlslab {

namespace {

constexpr std::array<char, 4> kMagic{'N', 'L', 'S', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw Error("truncated snapshot");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_trajectory_jsonl(std::ostream& out, const Trajectory& tr) {
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    nlohmann::json rec;
    rec["t"] = tr.times[i];
    rec["mass"] = tr.mass[i];
    rec["energy"] = tr.energy[i];
    rec["Hs_norms"] = tr.hs_norms[i];
    out << rec.dump() << '\n';
  }
}

void write_snapshot(std::ostream& out, const SpectralField& u) {
  const Lattice& lat = u.lattice();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(lat.dimension()));
  put_le<double>(out, lat.cutoff());
  put_le<std::uint64_t>(out, lat.size());
  for (std::size_t n = 0; n < lat.size(); ++n) {
    for (int i = 0; i < lat.dimension(); ++i) put_le<std::int32_t>(out, lat.mode(n)[i]);
  }
  for (const auto& z : u.coeffs()) {
    put_le<double>(out, z.real());
    put_le<double>(out, z.imag());
  }
}

SpectralField read_snapshot(std::istream& in) {
  std::array<char, 4> magic;
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw Error("not a field snapshot");
  if (get_le<std::uint32_t>(in) != kVersion) throw Error("unsupported snapshot version");
  const int d = static_cast<int>(get_le<std::uint32_t>(in));
  const double cutoff = get_le<double>(in);
  const std::uint64_t count = get_le<std::uint64_t>(in);
  auto lat = Lattice::make(d, cutoff);
  if (lat->size() != count) throw Error("snapshot mode count does not match its cutoff");
  for (std::size_t n = 0; n < count; ++n) {
    for (int i = 0; i < d; ++i) {
      if (get_le<std::int32_t>(in) != lat->mode(n)[i]) throw Error("snapshot mode list is not in lattice order");
    }
  }
  SpectralField u(lat);
  for (std::size_t n = 0; n < count; ++n) {
    const double re = get_le<double>(in);
    const double im = get_le<double>(in);
    u[n] = {re, im};
  }
  return u;
}

void write_snapshot_file(const std::string& path, const SpectralField& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_snapshot(out, u);
}

SpectralField read_snapshot_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_snapshot(in);
}

}  // namespace nlslab
