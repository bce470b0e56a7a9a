// AVX2 kernel backend. Compiled with -mavx2 (and deliberately without -mfma):
// the contract in kernels.hpp requires unfused multiply/add so that results
// match the scalar backend bit for bit. Vector lanes hold independent partial
// sums or independent output cells, never a reordered accumulation.

#include "stav/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace stav::kern {

namespace {

// (c0 + c2) + (c1 + c3), matching the scalar combine order.
inline double hsum4(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d s = _mm_add_pd(lo, hi);
    __m128d swap = _mm_unpackhi_pd(s, s);
    return _mm_cvtsd_f64(_mm_add_sd(s, swap));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    double s = hsum4(acc);
    for (std::size_t i = n4; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    }
    double s = hsum4(acc);
    for (std::size_t i = n4; i < n; ++i) s += a[i];
    return s;
}

double sq_dist_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double s = hsum4(acc);
    for (std::size_t i = n4; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_add_pd(yv, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, yv);
    }
    for (std::size_t i = n4; i < n; ++i) y[i] += alpha * x[i];
}

void conv3d_acc_avx2(double* out, int oh, int ow, int ot,
                     const double* in, int iw, int it,
                     const double* w, int kh, int kw, int kt) {
    const int ot4 = ot & ~3;
    for (int x = 0; x < oh; ++x) {
        for (int y = 0; y < ow; ++y) {
            double* orow = out + (std::size_t(x) * ow + y) * ot;
            for (int i = 0; i < kh; ++i) {
                for (int j = 0; j < kw; ++j) {
                    const double* irow = in + (std::size_t(x + i) * iw + (y + j)) * it;
                    const double* wrow = w + (std::size_t(i) * kw + j) * kt;
                    for (int k = 0; k < kt; ++k) {
                        const double wv = wrow[k];
                        const __m256d wvv = _mm256_set1_pd(wv);
                        const double* ir = irow + k;
                        int s = 0;
                        for (; s < ot4; s += 4) {
                            __m256d ov = _mm256_loadu_pd(orow + s);
                            ov = _mm256_add_pd(ov, _mm256_mul_pd(wvv, _mm256_loadu_pd(ir + s)));
                            _mm256_storeu_pd(orow + s, ov);
                        }
                        for (; s < ot; ++s) orow[s] += wv * ir[s];
                    }
                }
            }
        }
    }
}

void conv2d_acc_avx2(double* out, int oh, int ow,
                     const double* in, int iw,
                     const double* w, int kh, int kw) {
    const int ow4 = ow & ~3;
    for (int x = 0; x < oh; ++x) {
        double* orow = out + std::size_t(x) * ow;
        for (int i = 0; i < kh; ++i) {
            for (int j = 0; j < kw; ++j) {
                const double wv = w[std::size_t(i) * kw + j];
                const __m256d wvv = _mm256_set1_pd(wv);
                const double* ir = in + std::size_t(x + i) * iw + j;
                int y = 0;
                for (; y < ow4; y += 4) {
                    __m256d ov = _mm256_loadu_pd(orow + y);
                    ov = _mm256_add_pd(ov, _mm256_mul_pd(wvv, _mm256_loadu_pd(ir + y)));
                    _mm256_storeu_pd(orow + y, ov);
                }
                for (; y < ow; ++y) orow[y] += wv * ir[y];
            }
        }
    }
}

const Ops g_avx2 = {
    "avx2",    dot_avx2,        sum_avx2, sq_dist_avx2,
    axpy_avx2, conv3d_acc_avx2, conv2d_acc_avx2,
};

}  // namespace

const Ops* avx2_ops() {
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &g_avx2 : nullptr;
}

}  // namespace stav::kern

#else

namespace stav::kern {
const Ops* avx2_ops() { return nullptr; }
}  // namespace stav::kern

#endif
