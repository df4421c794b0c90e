#include "torusperc/field_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "torusperc/errors.hpp"

namespace torusperc {

namespace {

constexpr char kMagic[4] = {'T', 'P', 'F', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error("format-invalid", "truncated field file");
  return v;
}

}  // namespace

void write_field_binary(const FieldSample& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io-failure", "cannot open " + path + " for writing");
  out.write(kMagic, sizeof kMagic);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(f.grid.d));
  put(out, static_cast<std::uint32_t>(f.grid.n));
  put(out, f.grid.side);
  put(out, f.seed);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw Error("io-failure", "write failed for " + path);
}

FieldSample read_field_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-failure", "cannot open " + path);
  char magic[4];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error("format-invalid", "not a field file: " + path);
  auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw Error("format-invalid", "unsupported field file version");
  auto d = get<std::uint32_t>(in);
  auto n = get<std::uint32_t>(in);
  auto side = get<double>(in);
  auto seed = get<std::uint64_t>(in);
  FieldSample f;
  f.grid = TorusGrid(static_cast<int>(d), static_cast<int>(n), side);
  f.seed = seed;
  f.values.resize(f.grid.cell_count());
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!in) throw Error("format-invalid", "field file shorter than header promises");
  return f;
}

void write_field_csv(const FieldSample& f, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("io-failure", "cannot open " + path + " for writing");
  out << "# torusperc field csv v1 d=" << f.grid.d << " n=" << f.grid.n << " side=" << f.grid.side
      << " seed=" << f.seed << "\n";
  out << (f.grid.d == 3 ? "axis_0,axis_1,axis_2,value\n" : "axis_0,axis_1,value\n");
  char buf[32];
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    auto c = f.grid.coords(i);
    std::snprintf(buf, sizeof buf, "%.17g", f.values[i]);
    out << c[0] << ',' << c[1] << ',';
    if (f.grid.d == 3) out << c[2] << ',';
    out << buf << "\n";
  }
  if (!out) throw Error("io-failure", "write failed for " + path);
}

}  // namespace torusperc
