#include "spots/layer.hpp"

#include <stdexcept>

namespace spots {

std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kFullyConnected: return "fc";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kAvgPool: return "avgpool";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& why) {
  throw std::invalid_argument("layer: " + why);
}

}  // namespace

void LayerSpec::validate() const {
  if (channels < 1 || height < 1 || width < 1) fail("input dimensions must be positive");
  if (requant_shift < 0 || requant_shift > 31) fail("requant shift out of range");

  if (kind == LayerKind::kFullyConnected) {
    if (filters < 1) fail("fc layer needs a positive output count");
    if (batch < 1) fail("fc batch must be positive");
    if (!bias.empty() && static_cast<int>(bias.size()) != filters)
      fail("bias length must equal the output count");
    return;
  }

  if (kernel_h < 1 || kernel_w < 1) fail("kernel must be positive");
  if (stride < 1) fail("stride must be positive");
  if (pad < 0) fail("padding must be non-negative");
  if (height + 2 * pad < kernel_h || width + 2 * pad < kernel_w)
    fail("kernel larger than padded input");
  if ((height + 2 * pad - kernel_h) % stride != 0 ||
      (width + 2 * pad - kernel_w) % stride != 0)
    fail("stride does not divide the padded input evenly");

  if (kind == LayerKind::kConv) {
    if (filters < 1) fail("conv layer needs a positive filter count");
    if (!bias.empty() && static_cast<int>(bias.size()) != filters)
      fail("bias length must equal the filter count");
  } else {
    if (!bias.empty()) fail("pooling layers take no bias");
  }
}

}  // namespace spots
