#include "spots/tensor.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace spots {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'N', 'S'};
constexpr u8 kVersion = 1;
constexpr u8 kDtypeInt16 = 0;

void put_u32(std::string& out, u32 v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

u32 get_u32(const u8* p) {
  return static_cast<u32>(p[0]) | static_cast<u32>(p[1]) << 8 |
         static_cast<u32>(p[2]) << 16 | static_cast<u32>(p[3]) << 24;
}

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw std::runtime_error(path + ": " + why);
}

}  // namespace

void write_tensor(const std::string& path, const TensorFile& t) {
  if (t.dims.empty()) throw std::invalid_argument("tensor needs at least one dimension");
  if (t.dims.size() > 255) throw std::invalid_argument("tensor rank too large");
  if (t.element_count() != t.values.size())
    throw std::invalid_argument("tensor dims do not match payload size");

  std::string buf;
  buf.append(kMagic, 4);
  buf.push_back(static_cast<char>(kVersion));
  buf.push_back(static_cast<char>(kDtypeInt16));
  buf.push_back(static_cast<char>(t.dims.size()));
  buf.append(3, '\0');
  for (u32 d : t.dims) put_u32(buf, d);
  for (i16 v : t.values) {
    u32 u = static_cast<u32>(static_cast<std::uint16_t>(v));
    buf.push_back(static_cast<char>(u & 0xff));
    buf.push_back(static_cast<char>((u >> 8) & 0xff));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) bad(path, "cannot open for writing");
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) bad(path, "write failed");
}

TensorFile read_tensor(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) bad(path, "cannot open");
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const u8* p = reinterpret_cast<const u8*>(buf.data());

  if (buf.size() < 10) bad(path, "truncated header");
  if (std::memcmp(p, kMagic, 4) != 0) bad(path, "bad magic, not a tensor file");
  if (p[4] != kVersion) bad(path, "unsupported version");
  if (p[5] != kDtypeInt16) bad(path, "unsupported dtype");
  size_t rank = p[6];
  if (rank == 0) bad(path, "zero-rank tensor");
  if (p[7] != 0 || p[8] != 0 || p[9] != 0) bad(path, "reserved header bytes not zero");
  if (buf.size() < 10 + 4 * rank) bad(path, "truncated dimension list");

  TensorFile t;
  size_t n = 1;
  for (size_t i = 0; i < rank; ++i) {
    u32 d = get_u32(p + 10 + 4 * i);
    if (d == 0) bad(path, "zero dimension");
    t.dims.push_back(d);
    n *= d;
  }
  size_t payload = 10 + 4 * rank;
  if (buf.size() != payload + 2 * n) bad(path, "payload size mismatch");
  t.values.resize(n);
  for (size_t i = 0; i < n; ++i) {
    std::uint16_t u = static_cast<std::uint16_t>(p[payload + 2 * i]) |
                      static_cast<std::uint16_t>(p[payload + 2 * i + 1]) << 8;
    t.values[i] = static_cast<i16>(u);
  }
  return t;
}

TensorFile to_tensor(const FeatureMap& x) {
  return TensorFile{{static_cast<u32>(x.channels), static_cast<u32>(x.height),
                     static_cast<u32>(x.width)},
                    x.values};
}

TensorFile to_tensor(const Mat16& m) {
  return TensorFile{{static_cast<u32>(m.rows), static_cast<u32>(m.cols)}, m.values};
}

TensorFile to_tensor(const FilterSet& f) {
  return TensorFile{{static_cast<u32>(f.filters), static_cast<u32>(f.channels),
                     static_cast<u32>(f.kernel_h), static_cast<u32>(f.kernel_w)},
                    f.values};
}

FeatureMap feature_from_tensor(const TensorFile& t) {
  if (t.dims.size() != 3) throw std::runtime_error("feature map tensor must be rank 3");
  FeatureMap x(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
               static_cast<int>(t.dims[2]));
  x.values = t.values;
  return x;
}

Mat16 mat_from_tensor(const TensorFile& t) {
  if (t.dims.size() != 2) throw std::runtime_error("matrix tensor must be rank 2");
  Mat16 m(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
  m.values = t.values;
  return m;
}

}  // namespace spots
