#include "spots/reference.hpp"

#include <algorithm>
#include <stdexcept>

namespace spots {

Mat16 flatten_filters(const FilterSet& f) {
  Mat16 w(f.filters, f.channels * f.kernel_h * f.kernel_w);
  for (int fi = 0; fi < f.filters; ++fi)
    for (int c = 0; c < f.channels; ++c)
      for (int r = 0; r < f.kernel_h; ++r)
        for (int s = 0; s < f.kernel_w; ++s)
          w.at(fi, (c * f.kernel_h + r) * f.kernel_w + s) = f.at(fi, c, r, s);
  return w;
}

FilterSet unflatten_filters(const Mat16& w, int channels, int kernel_h, int kernel_w) {
  if (w.cols != channels * kernel_h * kernel_w)
    throw std::invalid_argument("weight matrix width does not match filter geometry");
  FilterSet f(w.rows, channels, kernel_h, kernel_w);
  for (int fi = 0; fi < w.rows; ++fi)
    for (int c = 0; c < channels; ++c)
      for (int r = 0; r < kernel_h; ++r)
        for (int s = 0; s < kernel_w; ++s)
          f.at(fi, c, r, s) = w.at(fi, (c * kernel_h + r) * kernel_w + s);
  return f;
}

Mat16 im2col_reference(const FeatureMap& x, const LayerSpec& layer) {
  layer.validate();
  const int out_h = layer.out_h(), out_w = layer.out_w();
  Mat16 m(layer.patch_rows(), out_h * out_w);
  for (int py = 0; py < out_h; ++py) {
    for (int px = 0; px < out_w; ++px) {
      const int p = py * out_w + px;
      for (int c = 0; c < layer.channels; ++c) {
        for (int r = 0; r < layer.kernel_h; ++r) {
          for (int s = 0; s < layer.kernel_w; ++s) {
            const int y = py * layer.stride - layer.pad + r;
            const int xx = px * layer.stride - layer.pad + s;
            const int row = (c * layer.kernel_h + r) * layer.kernel_w + s;
            const bool in = y >= 0 && y < layer.height && xx >= 0 && xx < layer.width;
            m.at(row, p) = in ? x.at(c, y, xx) : static_cast<i16>(0);
          }
        }
      }
    }
  }
  return m;
}

AccMat gemm_reference(const Mat16& w, const Mat16& m, bool track24) {
  if (w.cols != m.rows) throw std::invalid_argument("gemm: inner dimensions differ");
  AccMat o(w.rows, m.cols);
  for (int i = 0; i < w.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      i64 acc = 0;
      for (int k = 0; k < w.cols; ++k) {
        acc += static_cast<i32>(w.at(i, k)) * static_cast<i32>(m.at(k, j));
        if (track24 && outside_acc24(acc)) ++o.overflow24_events;
      }
      o.at(i, j) = wrap32(acc);
    }
  }
  return o;
}

FeatureMap conv_reference(const FeatureMap& x, const FilterSet& f, const LayerSpec& layer) {
  layer.validate();
  if (f.channels != layer.channels || f.kernel_h != layer.kernel_h ||
      f.kernel_w != layer.kernel_w || f.filters != layer.filters)
    throw std::invalid_argument("conv: filter set does not match layer");

  const int out_h = layer.out_h(), out_w = layer.out_w();
  FeatureMap out(layer.filters, out_h, out_w);
  for (int fi = 0; fi < layer.filters; ++fi) {
    for (int py = 0; py < out_h; ++py) {
      for (int px = 0; px < out_w; ++px) {
        i64 sum = 0;
        for (int c = 0; c < layer.channels; ++c) {
          for (int r = 0; r < layer.kernel_h; ++r) {
            for (int s = 0; s < layer.kernel_w; ++s) {
              const int y = py * layer.stride - layer.pad + r;
              const int xx = px * layer.stride - layer.pad + s;
              if (y < 0 || y >= layer.height || xx < 0 || xx >= layer.width) continue;
              sum += static_cast<i32>(f.at(fi, c, r, s)) * static_cast<i32>(x.at(c, y, xx));
            }
          }
        }
        i64 acc = wrap32(sum);  // the matrix path stores 32-bit accumulators
        if (!layer.bias.empty()) acc += layer.bias[fi];
        if (layer.relu) acc = std::max<i64>(acc, 0);
        out.at(fi, py, px) = requantize(acc, layer.requant_shift);
      }
    }
  }
  return out;
}

FeatureMap reshape_output(const AccMat& o, const LayerSpec& layer) {
  const int out_h = layer.out_h(), out_w = layer.out_w();
  if (o.rows != layer.filters || o.cols != out_h * out_w)
    throw std::invalid_argument("reshape: matrix does not match layer output");
  FeatureMap out(layer.filters, out_h, out_w);
  for (int fi = 0; fi < o.rows; ++fi) {
    for (int p = 0; p < o.cols; ++p) {
      i64 acc = o.at(fi, p);
      if (!layer.bias.empty()) acc += layer.bias[fi];
      if (layer.relu) acc = std::max<i64>(acc, 0);
      out.at(fi, p / out_w, p % out_w) = requantize(acc, layer.requant_shift);
    }
  }
  return out;
}

FeatureMap pool_reference(const FeatureMap& x, const LayerSpec& layer) {
  layer.validate();
  if (layer.kind != LayerKind::kMaxPool && layer.kind != LayerKind::kAvgPool)
    throw std::invalid_argument("pool_reference: not a pooling layer");
  const bool is_max = layer.kind == LayerKind::kMaxPool;
  const int out_h = layer.out_h(), out_w = layer.out_w();
  const int window = layer.kernel_h * layer.kernel_w;

  FeatureMap out(layer.channels, out_h, out_w);
  for (int c = 0; c < layer.channels; ++c) {
    for (int py = 0; py < out_h; ++py) {
      for (int px = 0; px < out_w; ++px) {
        // Padding contributes explicit zeros, exactly as the patch units
        // materialize them, so max can rise to 0 and averages keep the
        // full window in the divisor.
        i32 best = kInt16Min - 1;
        i32 sum = 0;
        for (int r = 0; r < layer.kernel_h; ++r) {
          for (int s = 0; s < layer.kernel_w; ++s) {
            const int y = py * layer.stride - layer.pad + r;
            const int xx = px * layer.stride - layer.pad + s;
            const bool in = y >= 0 && y < layer.height && xx >= 0 && xx < layer.width;
            const i32 v = in ? x.at(c, y, xx) : 0;
            best = std::max(best, v);
            sum += v;
          }
        }
        i32 v = is_max ? best : sum / window;  // truncating division
        if (layer.relu) v = std::max(v, 0);
        out.at(c, py, px) = saturate16(v);
      }
    }
  }
  return out;
}

AccMat fc_reference(const Mat16& w, const Mat16& x, const std::vector<i16>& bias,
                    bool relu, bool track24) {
  AccMat o = gemm_reference(w, x, track24);
  if (!bias.empty() && static_cast<int>(bias.size()) != w.rows)
    throw std::invalid_argument("fc: bias length must equal the output count");
  for (int i = 0; i < o.rows; ++i) {
    for (int j = 0; j < o.cols; ++j) {
      i64 acc = o.at(i, j);
      if (!bias.empty()) acc += bias[i];
      if (relu) acc = std::max<i64>(acc, 0);
      o.at(i, j) = wrap32(acc);
    }
  }
  return o;
}

}  // namespace spots
