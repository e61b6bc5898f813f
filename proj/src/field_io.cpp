#include "dplab/field_io.hpp"

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "dplab/error.hpp"

namespace dplab {

namespace {

constexpr char kTextMagic[] = "dplab-field";
constexpr char kBinaryMagic[4] = {'D', 'P', 'L', 'F'};
constexpr std::uint32_t kVersion = 1;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  DPLAB_THROW_IF(!is, ErrorCode::Io, "truncated binary field");
  return v;
}

Field read_text(std::istream& is) {
  std::string magic;
  std::uint32_t version = 0;
  is >> magic >> version;
  DPLAB_THROW_IF(!is || magic != kTextMagic || version != kVersion, ErrorCode::Io, "bad field header");
  int dim = 0, nx = 0, nt = 0;
  double x = 0.0, y = 0.0, t0 = 0.0, radius = 0.0, len = 0.0;
  is >> dim >> nx >> nt >> x >> y >> t0 >> radius >> len;
  DPLAB_THROW_IF(!is, ErrorCode::Io, "bad field geometry");
  SpaceTimeGrid grid(dim, nx, nt, {x, y}, t0, radius, len);
  std::vector<double> values(grid.size());
  for (double& v : values) {
    std::string tok;
    is >> tok;
    DPLAB_THROW_IF(!is, ErrorCode::Io, "truncated field values");
    try {
      std::size_t used = 0;
      v = std::stod(tok, &used);
      DPLAB_THROW_IF(used != tok.size(), ErrorCode::Io, "bad field value '" + tok + "'");
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::Io, "bad field value '" + tok + "'");
    }
  }
  return Field(grid, std::move(values));
}

Field read_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  DPLAB_THROW_IF(!is || std::memcmp(magic, kBinaryMagic, 4) != 0, ErrorCode::Io, "bad binary magic");
  DPLAB_THROW_IF(get<std::uint32_t>(is) != kVersion, ErrorCode::Io, "unsupported binary version");
  const auto dim = get<std::int32_t>(is);
  const auto nx = get<std::int32_t>(is);
  const auto nt = get<std::int32_t>(is);
  std::array<double, 5> geo{};
  for (double& g : geo) g = get<double>(is);
  SpaceTimeGrid grid(dim, nx, nt, {geo[0], geo[1]}, geo[2], geo[3], geo[4]);
  std::vector<double> values(grid.size());
  is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  DPLAB_THROW_IF(!is, ErrorCode::Io, "truncated binary field");
  return Field(grid, std::move(values));
}

}  // namespace

void write_field(std::ostream& os, const Field& f, FieldFormat format) {
  const auto& g = f.grid();
  if (format == FieldFormat::binary) {
    os.write(kBinaryMagic, 4);
    put(os, kVersion);
    put<std::int32_t>(os, g.dim());
    put<std::int32_t>(os, g.nx());
    put<std::int32_t>(os, g.nt());
    for (const double v : {g.x0()[0], g.x0()[1], g.t0(), g.radius(), g.time_length()}) put(os, v);
    const auto vals = f.values();
    os.write(reinterpret_cast<const char*>(vals.data()), static_cast<std::streamsize>(vals.size() * sizeof(double)));
  } else {
    os << kTextMagic << ' ' << kVersion << '\n'
       << g.dim() << ' ' << g.nx() << ' ' << g.nt() << '\n'
       << fmt17(g.x0()[0]) << ' ' << fmt17(g.x0()[1]) << ' ' << fmt17(g.t0()) << ' ' << fmt17(g.radius()) << ' '
       << fmt17(g.time_length()) << '\n';
    const std::size_t np = g.nodes_per_slice();
    for (int j = 0; j < g.nt(); ++j) {
      const auto s = f.slice(j);
      for (std::size_t i = 0; i < np; ++i) os << fmt17(s[i]) << (i + 1 == np ? '\n' : ' ');
    }
  }
  DPLAB_THROW_IF(!os, ErrorCode::Io, "failed writing field");
}

Field read_field(std::istream& is) {
  const int c = is.peek();
  DPLAB_THROW_IF(c == std::char_traits<char>::eof(), ErrorCode::Io, "empty field stream");
  return c == 'D' ? read_binary(is) : read_text(is);
}

void save_field(const std::string& path, const Field& f, FieldFormat format) {
  std::ofstream os(path, std::ios::binary);
  DPLAB_THROW_IF(!os, ErrorCode::Io, "cannot open " + path);
  write_field(os, f, format);
}

Field load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  DPLAB_THROW_IF(!is, ErrorCode::Io, "cannot open " + path);
  return read_field(is);
}

}  // namespace dplab
