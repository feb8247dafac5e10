#pragma once

#include <cstdint>

// Hot numeric kernels. Each kernel has a serial reference implementation and
// an OpenMP-parallel one; the dispatcher picks according to exec_mode().
// tools/bench_kernels compares the two, tests assert they agree.

namespace crec::kern {

enum class Exec { Serial, Parallel };

Exec& exec_mode();  // process-wide default, Parallel unless overridden

namespace serial {
// Row-major C[m,n] = op(A) * op(B), optionally accumulating into C.
// op(A) is A[m,k] or, when trans_a, A stored as [k,m]. Same for B.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* A, const double* B,
          double* C, bool accumulate);
// input [C,H,W] -> cols [C*kh*kw, oh*ow] for a strided, zero-padded conv
void im2col(const double* in, int c, int h, int w, int kh, int kw, int stride, int pad,
            double* cols);
// transpose of im2col (scatter-add), for conv backward
void col2im(const double* cols, int c, int h, int w, int kh, int kw, int stride, int pad,
            double* in_grad);
// all-pairs nearest neighbour: for each of n points (3d), min distance to any of m points
void nn_distances(const double* pts, int n, const double* ref, int m, double* out);
}  // namespace serial

namespace par {
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* A, const double* B,
          double* C, bool accumulate);
void im2col(const double* in, int c, int h, int w, int kh, int kw, int stride, int pad,
            double* cols);
void col2im(const double* cols, int c, int h, int w, int kh, int kw, int stride, int pad,
            double* in_grad);
void nn_distances(const double* pts, int n, const double* ref, int m, double* out);
}  // namespace par

// Dispatching wrappers.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* A, const double* B,
          double* C, bool accumulate = false);
void im2col(const double* in, int c, int h, int w, int kh, int kw, int stride, int pad,
            double* cols);
void col2im(const double* cols, int c, int h, int w, int kh, int kw, int stride, int pad,
            double* in_grad);
void nn_distances(const double* pts, int n, const double* ref, int m, double* out);

inline int conv_out_dim(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

}  // namespace crec::kern
