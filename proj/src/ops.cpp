#include "stav/ops.hpp"

#include <cmath>
#include <stdexcept>

#include "stav/kernels.hpp"
#include "stav/rng.hpp"

namespace stav {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw shape_error(msg);
}

std::vector<int> conv3d_out_shape(const Tensor& in, const Tensor& w) {
    require(in.rank() == 3, "conv3d input must be rank 3, got " + shape_str(in.shape()));
    require(w.rank() == 3, "conv3d kernel must be rank 3, got " + shape_str(w.shape()));
    for (int a = 0; a < 3; ++a) {
        require(w.extent(a) <= in.extent(a),
                "conv3d kernel " + shape_str(w.shape()) + " exceeds input " + shape_str(in.shape()));
    }
    return {in.extent(0) - w.extent(0) + 1, in.extent(1) - w.extent(1) + 1,
            in.extent(2) - w.extent(2) + 1};
}

std::vector<int> conv2d_out_shape(const Tensor& in, const Tensor& w) {
    require(in.rank() == 2, "conv2d input must be rank 2, got " + shape_str(in.shape()));
    require(w.rank() == 2, "conv2d kernel must be rank 2, got " + shape_str(w.shape()));
    for (int a = 0; a < 2; ++a) {
        require(w.extent(a) <= in.extent(a),
                "conv2d kernel " + shape_str(w.shape()) + " exceeds input " + shape_str(in.shape()));
    }
    return {in.extent(0) - w.extent(0) + 1, in.extent(1) - w.extent(1) + 1};
}

// Upstream gradient through tanh at activation v: g * (1 - v^2).
Tensor preact_grad(const Tensor& out, const Tensor& g_out) {
    require(out.same_shape(g_out), "gradient shape " + shape_str(g_out.shape()) +
                                       " does not match activation " + shape_str(out.shape()));
    Tensor gz(out.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        gz[i] = g_out[i] * (1.0 - out[i] * out[i]);
    }
    return gz;
}

}  // namespace

Tensor conv3d_pre(const Tensor& in, const ConvKernel3D& k) {
    Tensor out = Tensor::filled(conv3d_out_shape(in, k.weights), k.bias);
    kern::active().conv3d_acc(out.data(), out.extent(0), out.extent(1), out.extent(2),
                              in.data(), in.extent(1), in.extent(2),
                              k.weights.data(), k.weights.extent(0), k.weights.extent(1),
                              k.weights.extent(2));
    return out;
}

Tensor conv3d(const Tensor& in, const ConvKernel3D& k) { return tanh_map(conv3d_pre(in, k)); }

Tensor conv2d_pre(const Tensor& in, const ConvKernel2D& k) {
    Tensor out = Tensor::filled(conv2d_out_shape(in, k.weights), k.bias);
    kern::active().conv2d_acc(out.data(), out.extent(0), out.extent(1),
                              in.data(), in.extent(1),
                              k.weights.data(), k.weights.extent(0), k.weights.extent(1));
    return out;
}

Tensor conv2d(const Tensor& in, const ConvKernel2D& k) { return tanh_map(conv2d_pre(in, k)); }

Tensor tanh_map(const Tensor& pre) {
    Tensor out(pre.shape());
    for (std::size_t i = 0; i < pre.size(); ++i) out[i] = std::tanh(pre[i]);
    return out;
}

Conv3DGrads conv3d_backward(const Tensor& in, const ConvKernel3D& k,
                            const Tensor& out, const Tensor& g_out) {
    require(out.shape() == conv3d_out_shape(in, k.weights),
            "conv3d_backward activation shape " + shape_str(out.shape()) + " does not match forward");
    const Tensor gz = preact_grad(out, g_out);
    const auto& ops = kern::active();

    const int oh = out.extent(0), ow = out.extent(1), ot = out.extent(2);
    const int kh = k.weights.extent(0), kw = k.weights.extent(1), kt = k.weights.extent(2);
    const int iw = in.extent(1), it = in.extent(2);

    Conv3DGrads g{Tensor(k.weights.shape()), 0.0, Tensor(in.shape())};
    g.d_bias = ops.sum(gz.data(), gz.size());

    for (int x = 0; x < oh; ++x) {
        for (int y = 0; y < ow; ++y) {
            const double* gzrow = gz.data() + (std::size_t(x) * ow + y) * ot;
            for (int i = 0; i < kh; ++i) {
                for (int j = 0; j < kw; ++j) {
                    const double* irow = in.data() + (std::size_t(x + i) * iw + (y + j)) * it;
                    double* drow = g.d_input.data() + (std::size_t(x + i) * iw + (y + j)) * it;
                    double* wrow = g.d_weights.data() + (std::size_t(i) * kw + j) * kt;
                    const double* krow = k.weights.data() + (std::size_t(i) * kw + j) * kt;
                    for (int kk = 0; kk < kt; ++kk) {
                        wrow[kk] += ops.dot(gzrow, irow + kk, ot);
                        ops.axpy(krow[kk], gzrow, drow + kk, ot);
                    }
                }
            }
        }
    }
    return g;
}

Conv2DGrads conv2d_backward(const Tensor& in, const ConvKernel2D& k,
                            const Tensor& out, const Tensor& g_out) {
    require(out.shape() == conv2d_out_shape(in, k.weights),
            "conv2d_backward activation shape " + shape_str(out.shape()) + " does not match forward");
    const Tensor gz = preact_grad(out, g_out);
    const auto& ops = kern::active();

    const int oh = out.extent(0), ow = out.extent(1);
    const int kh = k.weights.extent(0), kw = k.weights.extent(1);
    const int iw = in.extent(1);

    Conv2DGrads g{Tensor(k.weights.shape()), 0.0, Tensor(in.shape())};
    g.d_bias = ops.sum(gz.data(), gz.size());

    for (int x = 0; x < oh; ++x) {
        const double* gzrow = gz.data() + std::size_t(x) * ow;
        for (int i = 0; i < kh; ++i) {
            for (int j = 0; j < kw; ++j) {
                const double* irow = in.data() + std::size_t(x + i) * iw + j;
                double* drow = g.d_input.data() + std::size_t(x + i) * iw + j;
                g.d_weights.at2(i, j) += ops.dot(gzrow, irow, ow);
                ops.axpy(k.weights.at2(i, j), gzrow, drow, ow);
            }
        }
    }
    return g;
}

PoolResult maxpool2d(const Tensor& in, int d1, int d2) {
    require(in.rank() == 2 || in.rank() == 3,
            "maxpool2d input must be rank 2 or 3, got " + shape_str(in.shape()));
    require(d1 >= 1 && d2 >= 1, "maxpool2d window must be positive");
    const int h = in.extent(0), w = in.extent(1);
    const int t = in.rank() == 3 ? in.extent(2) : 1;
    const int oh = h / d1, ow = w / d2;
    require(oh >= 1 && ow >= 1, "maxpool2d window (" + std::to_string(d1) + ", " +
                                    std::to_string(d2) + ") exceeds input " + shape_str(in.shape()));

    std::vector<int> oshape = in.rank() == 3 ? std::vector<int>{oh, ow, t} : std::vector<int>{oh, ow};
    PoolResult r{Tensor(oshape), std::vector<std::size_t>()};
    r.argmax.resize(r.out.size());

    const auto flat = [&](int x, int y, int s) {
        return (std::size_t(x) * w + y) * t + s;
    };
    std::size_t o = 0;
    for (int bx = 0; bx < oh; ++bx) {
        for (int by = 0; by < ow; ++by) {
            for (int s = 0; s < t; ++s, ++o) {
                double best = in[flat(bx * d1, by * d2, s)];
                std::size_t best_idx = flat(bx * d1, by * d2, s);
                for (int i = 0; i < d1; ++i) {
                    for (int j = 0; j < d2; ++j) {
                        const std::size_t idx = flat(bx * d1 + i, by * d2 + j, s);
                        if (in[idx] > best) {
                            best = in[idx];
                            best_idx = idx;
                        }
                    }
                }
                // output is laid out (oh, ow, t) but we filled in (bx, by, s) order,
                // which matches row-major exactly
                r.out[o] = best;
                r.argmax[o] = best_idx;
            }
        }
    }
    return r;
}

Tensor maxpool2d_backward(const std::vector<int>& in_shape, const PoolResult& fwd,
                          const Tensor& g_out) {
    require(fwd.out.same_shape(g_out), "maxpool2d_backward gradient shape " +
                                           shape_str(g_out.shape()) + " does not match pooled output " +
                                           shape_str(fwd.out.shape()));
    require(fwd.argmax.size() == fwd.out.size(), "maxpool2d_backward cache missing argmax");
    Tensor d_in(in_shape);
    for (std::size_t o = 0; o < g_out.size(); ++o) {
        require(fwd.argmax[o] < d_in.size(), "maxpool2d_backward argmax out of range");
        d_in[fwd.argmax[o]] += g_out[o];
    }
    return d_in;
}

std::vector<double> fully_connected(std::span<const double> x, const Tensor& w,
                                    std::span<const double> b) {
    require(w.rank() == 2, "fully_connected weights must be rank 2, got " + shape_str(w.shape()));
    const int k = w.extent(0), n = w.extent(1);
    require(x.size() == std::size_t(n), "fully_connected input size " + std::to_string(x.size()) +
                                            " does not match weights " + shape_str(w.shape()));
    require(b.size() == std::size_t(k), "fully_connected bias size " + std::to_string(b.size()) +
                                            " does not match weights " + shape_str(w.shape()));
    const auto& ops = kern::active();
    std::vector<double> out(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) {
        out[r] = std::tanh(b[r] + ops.dot(w.data() + std::size_t(r) * n, x.data(), n));
    }
    return out;
}

FcGrads fc_backward(std::span<const double> x, const Tensor& w,
                    std::span<const double> out, std::span<const double> g_out) {
    const int k = w.extent(0), n = w.extent(1);
    require(out.size() == std::size_t(k) && g_out.size() == std::size_t(k),
            "fc_backward output/gradient size does not match weights " + shape_str(w.shape()));
    require(x.size() == std::size_t(n), "fc_backward input size does not match weights");
    const auto& ops = kern::active();

    FcGrads g{Tensor(w.shape()), std::vector<double>(k, 0.0), std::vector<double>(n, 0.0)};
    for (int r = 0; r < k; ++r) {
        const double gz = g_out[r] * (1.0 - out[r] * out[r]);
        g.d_bias[r] = gz;
        ops.axpy(gz, x.data(), g.d_weights.data() + std::size_t(r) * n, n);
        ops.axpy(gz, w.data() + std::size_t(r) * n, g.d_input.data(), n);
    }
    return g;
}

std::vector<std::uint8_t> dropout_mask(std::size_t n, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw std::invalid_argument("dropout rate must be in [0, 1), got " + std::to_string(rate));
    }
    std::mt19937_64 g(seed);
    std::vector<std::uint8_t> mask(n);
    for (std::size_t i = 0; i < n; ++i) {
        mask[i] = uniform01(g) < rate ? 0 : 1;
    }
    return mask;
}

}  // namespace stav
