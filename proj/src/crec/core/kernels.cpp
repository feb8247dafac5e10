#include "crec/core/kernels.hpp"

namespace crec::kern {

Exec& exec_mode() {
  static Exec mode = Exec::Parallel;
  return mode;
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* A, const double* B,
          double* C, bool accumulate) {
  if (exec_mode() == Exec::Serial)
    serial::gemm(trans_a, trans_b, m, n, k, A, B, C, accumulate);
  else
    par::gemm(trans_a, trans_b, m, n, k, A, B, C, accumulate);
}

void im2col(const double* in, int c, int h, int w, int kh, int kw, int stride, int pad,
            double* cols) {
  if (exec_mode() == Exec::Serial)
    serial::im2col(in, c, h, w, kh, kw, stride, pad, cols);
  else
    par::im2col(in, c, h, w, kh, kw, stride, pad, cols);
}

void col2im(const double* cols, int c, int h, int w, int kh, int kw, int stride, int pad,
            double* in_grad) {
  if (exec_mode() == Exec::Serial)
    serial::col2im(cols, c, h, w, kh, kw, stride, pad, in_grad);
  else
    par::col2im(cols, c, h, w, kh, kw, stride, pad, in_grad);
}

void nn_distances(const double* pts, int n, const double* ref, int m, double* out) {
  if (exec_mode() == Exec::Serial)
    serial::nn_distances(pts, n, ref, m, out);
  else
    par::nn_distances(pts, n, ref, m, out);
}

}  // namespace crec::kern
