#pragma once

#include "spots/layer.hpp"
#include "spots/tensor.hpp"

namespace spots {

// Brute-force golden models.  Everything here is written as plain loop
// nests over the layer definition, independent of the accelerator's
// scheduling, so engine outputs can be checked bit for bit against them.

// Filters (f,c,r,s) -> weight matrix, row f, column c*(R*S) + r*S + s.
Mat16 flatten_filters(const FilterSet& f);
FilterSet unflatten_filters(const Mat16& w, int channels, int kernel_h, int kernel_w);

// Patch matrix: column p = py*outW + px holds the zero-padded window whose
// top-left corner sits at (py*stride - pad, px*stride - pad), rows in the
// same canonical order as flatten_filters columns.
Mat16 im2col_reference(const FeatureMap& x, const LayerSpec& layer);

// Exact product w * m with 32-bit accumulation.  With track24 set, every
// accumulation step that leaves the 24-bit window bumps overflow24_events.
AccMat gemm_reference(const Mat16& w, const Mat16& m, bool track24 = false);

// Direct sliding-window convolution, including bias, ReLU and the layer's
// requantization shift.  This is the end-to-end oracle for conv layers.
FeatureMap conv_reference(const FeatureMap& x, const FilterSet& f, const LayerSpec& layer);

// GEMM output column p back to (f, py, px), applying bias / ReLU / shift /
// saturation in that order.  conv_reference(x) == reshape_output(gemm(...)).
FeatureMap reshape_output(const AccMat& o, const LayerSpec& layer);

// Window max / truncating-average pooling over the zero-padded input.
FeatureMap pool_reference(const FeatureMap& x, const LayerSpec& layer);

// w (filters x inputs) times activation matrix (inputs x batch), plus
// optional bias and ReLU, exact 32-bit result.
AccMat fc_reference(const Mat16& w, const Mat16& x, const std::vector<i16>& bias,
                    bool relu, bool track24 = false);

}  // namespace spots
