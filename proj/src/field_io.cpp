#include "velavg/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace velavg {
namespace {

constexpr std::array<char, 8> kMagic = {'V', 'E', 'L', 'A', 'V', 'G', '0', '1'};

template <typename T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), sizeof(T))) throw ShapeError("truncated snapshot file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void put_header(std::ostream& out, const SpaceGrid& g, int m, double lo, double hi) {
  out.write(kMagic.data(), kMagic.size());
  put<std::int32_t>(out, g.dim());
  put<std::int32_t>(out, g.points());
  put<double>(out, g.length());
  put<std::int32_t>(out, m);
  put<double>(out, lo);
  put<double>(out, hi);
}

}  // namespace

void write_binary(const std::string& path, const RealField& u) {
  auto out = open_out(path);
  put_header(out, u.grid(), 0, 0.0, 0.0);
  for (Index i = 0; i < u.size(); ++i) put<double>(out, u[i]);
}

void write_binary(const std::string& path, const KineticField& h) {
  auto out = open_out(path);
  const auto& lam = h.lambdas();
  put_header(out, h.grid(), lam.nodes(), lam.lo(), lam.hi());
  for (Index i = 0; i < h.values().rows(); ++i) {
    for (Index j = 0; j < h.values().cols(); ++j) put<double>(out, h.values()(i, j));
  }
}

Snapshot read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::array<char, 8> magic;
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ShapeError("not a snapshot file: " + path);
  const int d = get<std::int32_t>(in);
  const int n = get<std::int32_t>(in);
  const double length = get<double>(in);
  const int m = get<std::int32_t>(in);
  const double lo = get<double>(in);
  const double hi = get<double>(in);
  Snapshot snap{SpaceGrid(d, n, length), m, lo, hi, {}};
  const Index count = snap.grid.size() * std::max(m, 1);
  snap.data.resize(count);
  for (Index i = 0; i < count; ++i) snap.data[i] = get<double>(in);
  return snap;
}

void write_slice_csv(const std::string& path, const RealField& u, int axis, int fixed_index) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const auto& g = u.grid();
  if (axis < 0 || axis >= g.dim()) throw DomainError("slice axis out of range");
  out << "x,value\n" << std::setprecision(17);
  for (int i = 0; i < g.points(); ++i) {
    Index flat = g.dim() == 1 ? i : (axis == 0 ? g.flat(i, fixed_index) : g.flat(fixed_index, i));
    out << g.coordinate(i) << ',' << u[flat] << '\n';
  }
}

}  // namespace velavg
