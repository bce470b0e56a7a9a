#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Dispatched inner-loop kernels. Every backend implements the same summation
// contract so results are bit-identical whichever one runs:
//   * reductions keep four interleaved partial sums over blocks of 4 indices
//     and combine them as (c0 + c2) + (c1 + c3), then fold the remainder in
//     index order;
//   * elementwise updates use an unfused multiply followed by an add;
//   * convolution accumulators walk kernel taps in (i, j, k) order for every
//     output cell.
// The equivalence tests hold the backends to exact equality.

namespace stav::kern {

struct Ops {
    const char* name;

    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    // sum of squared differences
    double (*sq_dist)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    // out(x,y,s) += sum_{i,j,k} w(i,j,k) * in(x+i, y+j, s+k)
    // Row-major layouts; iw/it are the input width/time extents.
    void (*conv3d_acc)(double* out, int oh, int ow, int ot,
                       const double* in, int iw, int it,
                       const double* w, int kh, int kw, int kt);
    // out(x,y) += sum_{i,j} w(i,j) * in(x+i, y+j)
    void (*conv2d_acc)(double* out, int oh, int ow,
                       const double* in, int iw,
                       const double* w, int kh, int kw);
};

enum class Backend { scalar, avx2 };

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when this build/CPU cannot run AVX2

// Active-backend selection. Defaults to the best available; the environment
// variable STAV_KERNELS=scalar|avx2 or an explicit select() overrides it.
bool select(Backend b);  // false when the backend is unavailable
void select_auto();
const Ops& active();
std::string active_name();
std::vector<const Ops*> available_backends();

}  // namespace stav::kern
