#pragma once

#include <string>
#include <vector>

#include "spots/fixed_point.hpp"

namespace spots {

enum class LayerKind { kConv, kFullyConnected, kMaxPool, kAvgPool };

std::string to_string(LayerKind k);

// Geometry and arithmetic options for one layer.
//
// For conv and pool layers the spatial fields describe the input plane and
// the kernel; output dimensions must divide exactly, a layer whose stride
// leaves a remainder is rejected.  For fully connected layers the input is
// the flattened feature vector (channels*height*width) and `batch` columns
// are processed at once.
struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  int width = 0;
  int height = 0;
  int channels = 0;
  int kernel_h = 1;
  int kernel_w = 1;
  int filters = 0;    // conv / fc output count; unused for pooling
  int stride = 1;
  int pad = 0;
  int batch = 1;      // fc only
  std::vector<i16> bias;  // empty or `filters` entries (conv / fc)
  bool relu = false;
  int requant_shift = 0;

  int out_h() const { return (height + 2 * pad - kernel_h) / stride + 1; }
  int out_w() const { return (width + 2 * pad - kernel_w) / stride + 1; }
  int patch_rows() const { return kernel_h * kernel_w * channels; }
  int patch_count() const { return out_h() * out_w(); }
  int fc_inputs() const { return channels * height * width; }

  // Throws std::invalid_argument when dimensions are inconsistent.
  void validate() const;
};

}  // namespace spots
