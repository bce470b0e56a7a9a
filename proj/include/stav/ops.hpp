#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stav/tensor.hpp"

namespace stav {

struct ConvKernel3D {
    Tensor weights;  // (kh, kw, kt)
    double bias = 0.0;
};

struct ConvKernel2D {
    Tensor weights;  // (kh, kw)
    double bias = 0.0;
};

// Valid correlation, no padding. out(x,y,s) = b + sum_{i,j,k} w(i,j,k) * in(x+i,y+j,s+k).
Tensor conv3d_pre(const Tensor& in, const ConvKernel3D& k);
// tanh of conv3d_pre; cells follow the definition exactly.
Tensor conv3d(const Tensor& in, const ConvKernel3D& k);

Tensor conv2d_pre(const Tensor& in, const ConvKernel2D& k);
Tensor conv2d(const Tensor& in, const ConvKernel2D& k);

Tensor tanh_map(const Tensor& pre);

struct Conv3DGrads {
    Tensor d_weights;
    double d_bias = 0.0;
    Tensor d_input;
};
// `out` must be the activation returned by the matching forward call; the
// tanh derivative is evaluated as 1 - out^2.
Conv3DGrads conv3d_backward(const Tensor& in, const ConvKernel3D& k,
                            const Tensor& out, const Tensor& g_out);

struct Conv2DGrads {
    Tensor d_weights;
    double d_bias = 0.0;
    Tensor d_input;
};
Conv2DGrads conv2d_backward(const Tensor& in, const ConvKernel2D& k,
                            const Tensor& out, const Tensor& g_out);

// Non-overlapping (d1, d2) max pooling over (height, width); a trailing time
// axis, when present, is pooled slice by slice. Remainder rows/columns that do
// not fill a window are dropped. argmax keeps the flat input index of the
// first maximum in row-major order, one per output cell.
struct PoolResult {
    Tensor out;
    std::vector<std::size_t> argmax;
};
PoolResult maxpool2d(const Tensor& in, int d1, int d2);
Tensor maxpool2d_backward(const std::vector<int>& in_shape, const PoolResult& fwd,
                          const Tensor& g_out);

// out = tanh(W x + b); W is (k, n) row-major.
std::vector<double> fully_connected(std::span<const double> x, const Tensor& w,
                                    std::span<const double> b);

struct FcGrads {
    Tensor d_weights;
    std::vector<double> d_bias;
    std::vector<double> d_input;
};
FcGrads fc_backward(std::span<const double> x, const Tensor& w,
                    std::span<const double> out, std::span<const double> g_out);

// Keep-mask with P(drop) = rate; deterministic for a fixed seed.
std::vector<std::uint8_t> dropout_mask(std::size_t n, double rate, std::uint64_t seed);

}  // namespace stav
