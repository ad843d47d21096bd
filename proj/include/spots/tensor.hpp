#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spots/fixed_point.hpp"

namespace spots {

// Dense activation tensor in channel-major order: index = c*H*W + y*W + x.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<i16> values;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w)
      : channels(c), height(h), width(w),
        values(static_cast<size_t>(c) * h * w, 0) {}

  size_t size() const { return values.size(); }
  size_t index(int c, int y, int x) const {
    return (static_cast<size_t>(c) * height + y) * width + x;
  }
  i16 at(int c, int y, int x) const { return values[index(c, y, x)]; }
  i16& at(int c, int y, int x) { return values[index(c, y, x)]; }

  bool same_shape(const FeatureMap& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

// Row-major int16 matrix.  Used for both the flattened weight matrix
// (filters x R*S*C) and the patch matrix produced by Im2Col
// (R*S*C x patches).
struct Mat16 {
  int rows = 0;
  int cols = 0;
  std::vector<i16> values;

  Mat16() = default;
  Mat16(int r, int c)
      : rows(r), cols(c), values(static_cast<size_t>(r) * c, 0) {}

  size_t index(int r, int c) const {
    return static_cast<size_t>(r) * cols + c;
  }
  i16 at(int r, int c) const { return values[index(r, c)]; }
  i16& at(int r, int c) { return values[index(r, c)]; }

  bool operator==(const Mat16& o) const {
    return rows == o.rows && cols == o.cols && values == o.values;
  }
};

// 32-bit accumulator matrix (GEMM output before requantization).
// overflow24_events counts accumulation steps whose running sum left the
// 24-bit window; results themselves stay exact.
struct AccMat {
  int rows = 0;
  int cols = 0;
  std::vector<i32> values;
  u64 overflow24_events = 0;

  AccMat() = default;
  AccMat(int r, int c)
      : rows(r), cols(c), values(static_cast<size_t>(r) * c, 0) {}

  size_t index(int r, int c) const {
    return static_cast<size_t>(r) * cols + c;
  }
  i32 at(int r, int c) const { return values[index(r, c)]; }
  i32& at(int r, int c) { return values[index(r, c)]; }
};

// Filter bank in (f, c, r, s) order, matching the canonical linearization
// used when flattening to a weight matrix.
struct FilterSet {
  int filters = 0;
  int channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  std::vector<i16> values;

  FilterSet() = default;
  FilterSet(int f, int c, int kh, int kw)
      : filters(f), channels(c), kernel_h(kh), kernel_w(kw),
        values(static_cast<size_t>(f) * c * kh * kw, 0) {}

  size_t index(int f, int c, int r, int s) const {
    return ((static_cast<size_t>(f) * channels + c) * kernel_h + r) * kernel_w + s;
  }
  i16 at(int f, int c, int r, int s) const { return values[index(f, c, r, s)]; }
  i16& at(int f, int c, int r, int s) { return values[index(f, c, r, s)]; }
};

// -------------------------------------------------------------------------
// Tensor container file ("STNS" v1).
//
// Layout, all little-endian:
//   bytes 0-3   magic "STNS"
//   byte  4     version (1)
//   byte  5     dtype (0 = int16)
//   byte  6     rank
//   bytes 7-9   reserved, zero
//   then rank * u32 dims, then the int16 payload with the last dimension
//   varying fastest.
// -------------------------------------------------------------------------

struct TensorFile {
  std::vector<u32> dims;
  std::vector<i16> values;

  size_t element_count() const {
    size_t n = 1;
    for (u32 d : dims) n *= d;
    return dims.empty() ? 0 : n;
  }
};

void write_tensor(const std::string& path, const TensorFile& t);
TensorFile read_tensor(const std::string& path);

TensorFile to_tensor(const FeatureMap& x);
TensorFile to_tensor(const Mat16& m);
TensorFile to_tensor(const FilterSet& f);
FeatureMap feature_from_tensor(const TensorFile& t);
Mat16 mat_from_tensor(const TensorFile& t);

}  // namespace spots
