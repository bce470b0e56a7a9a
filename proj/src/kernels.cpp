#include "stav/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace stav::kern {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        c0 += a[i] * b[i];
        c1 += a[i + 1] * b[i + 1];
        c2 += a[i + 2] * b[i + 2];
        c3 += a[i + 3] * b[i + 3];
    }
    double s = (c0 + c2) + (c1 + c3);
    for (std::size_t i = n4; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_scalar(const double* a, std::size_t n) {
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        c0 += a[i];
        c1 += a[i + 1];
        c2 += a[i + 2];
        c3 += a[i + 3];
    }
    double s = (c0 + c2) + (c1 + c3);
    for (std::size_t i = n4; i < n; ++i) s += a[i];
    return s;
}

double sq_dist_scalar(const double* a, const double* b, std::size_t n) {
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        c0 += d0 * d0;
        c1 += d1 * d1;
        c2 += d2 * d2;
        c3 += d3 * d3;
    }
    double s = (c0 + c2) + (c1 + c3);
    for (std::size_t i = n4; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void conv3d_acc_scalar(double* out, int oh, int ow, int ot,
                       const double* in, int iw, int it,
                       const double* w, int kh, int kw, int kt) {
    for (int x = 0; x < oh; ++x) {
        for (int y = 0; y < ow; ++y) {
            double* orow = out + (std::size_t(x) * ow + y) * ot;
            for (int i = 0; i < kh; ++i) {
                for (int j = 0; j < kw; ++j) {
                    const double* irow = in + (std::size_t(x + i) * iw + (y + j)) * it;
                    const double* wrow = w + (std::size_t(i) * kw + j) * kt;
                    for (int k = 0; k < kt; ++k) {
                        const double wv = wrow[k];
                        const double* ir = irow + k;
                        for (int s = 0; s < ot; ++s) orow[s] += wv * ir[s];
                    }
                }
            }
        }
    }
}

void conv2d_acc_scalar(double* out, int oh, int ow,
                       const double* in, int iw,
                       const double* w, int kh, int kw) {
    for (int x = 0; x < oh; ++x) {
        double* orow = out + std::size_t(x) * ow;
        for (int i = 0; i < kh; ++i) {
            for (int j = 0; j < kw; ++j) {
                const double wv = w[std::size_t(i) * kw + j];
                const double* ir = in + std::size_t(x + i) * iw + j;
                for (int y = 0; y < ow; ++y) orow[y] += wv * ir[y];
            }
        }
    }
}

const Ops g_scalar = {
    "scalar",   dot_scalar,        sum_scalar, sq_dist_scalar,
    axpy_scalar, conv3d_acc_scalar, conv2d_acc_scalar,
};

std::atomic<const Ops*> g_active{nullptr};

const Ops* pick_default() {
    if (const char* env = std::getenv("STAV_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &g_scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_ops()) return avx2_ops();
    }
    if (const Ops* v = avx2_ops()) return v;
    return &g_scalar;
}

}  // namespace

const Ops& scalar_ops() { return g_scalar; }

bool select(Backend b) {
    switch (b) {
    case Backend::scalar:
        g_active.store(&g_scalar, std::memory_order_relaxed);
        return true;
    case Backend::avx2:
        if (const Ops* v = avx2_ops()) {
            g_active.store(v, std::memory_order_relaxed);
            return true;
        }
        return false;
    }
    return false;
}

void select_auto() { g_active.store(pick_default(), std::memory_order_relaxed); }

const Ops& active() {
    const Ops* p = g_active.load(std::memory_order_relaxed);
    if (!p) {
        p = pick_default();
        g_active.store(p, std::memory_order_relaxed);
    }
    return *p;
}

std::string active_name() { return active().name; }

std::vector<const Ops*> available_backends() {
    std::vector<const Ops*> v{&g_scalar};
    if (const Ops* a = avx2_ops()) v.push_back(a);
    return v;
}

}  // namespace stav::kern
