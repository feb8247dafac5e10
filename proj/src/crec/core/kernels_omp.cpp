#include <cmath>
#include <cstring>

#include "crec/core/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace crec::kern::par {

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* A, const double* B,
          double* C, bool accumulate) {
  if (!trans_a && !trans_b) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
      const double* a = A + static_cast<std::int64_t>(i) * k;
      double* c = C + static_cast<std::int64_t>(i) * n;
      if (!accumulate) std::memset(c, 0, sizeof(double) * n);
      for (int l = 0; l < k; ++l) {
        const double av = a[l];
        if (av == 0.0) continue;
        const double* b = B + static_cast<std::int64_t>(l) * n;
        for (int j = 0; j < n; ++j) c[j] += av * b[j];
      }
    }
  } else if (trans_a && !trans_b) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
      double* c = C + static_cast<std::int64_t>(i) * n;
      if (!accumulate) std::memset(c, 0, sizeof(double) * n);
      for (int l = 0; l < k; ++l) {
        const double av = A[static_cast<std::int64_t>(l) * m + i];
        if (av == 0.0) continue;
        const double* b = B + static_cast<std::int64_t>(l) * n;
        for (int j = 0; j < n; ++j) c[j] += av * b[j];
      }
    }
  } else if (!trans_a && trans_b) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
      const double* a = A + static_cast<std::int64_t>(i) * k;
      double* c = C + static_cast<std::int64_t>(i) * n;
      for (int j = 0; j < n; ++j) {
        const double* b = B + static_cast<std::int64_t>(j) * k;
        double s = 0.0;
        for (int l = 0; l < k; ++l) s += a[l] * b[l];
        c[j] = accumulate ? c[j] + s : s;
      }
    }
  } else {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < k; ++l) s += A[static_cast<std::int64_t>(l) * m + i] *
                                         B[static_cast<std::int64_t>(j) * k + l];
        double* c = &C[static_cast<std::int64_t>(i) * n + j];
        *c = accumulate ? *c + s : s;
      }
  }
}

void im2col(const double* in, int c, int h, int w, int kh, int kw, int stride, int pad,
            double* cols) {
  const int oh = conv_out_dim(h, kh, stride, pad);
  const int ow = conv_out_dim(w, kw, stride, pad);
  const int rows = c * kh * kw;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < rows; ++row) {
    const int ch = row / (kh * kw);
    const int ki = (row / kw) % kh;
    const int kj = row % kw;
    double* dst = cols + static_cast<std::int64_t>(row) * oh * ow;
    for (int oi = 0; oi < oh; ++oi) {
      const int ii = oi * stride - pad + ki;
      for (int oj = 0; oj < ow; ++oj) {
        const int jj = oj * stride - pad + kj;
        dst[oi * ow + oj] = (ii >= 0 && ii < h && jj >= 0 && jj < w)
                                ? in[(static_cast<std::int64_t>(ch) * h + ii) * w + jj]
                                : 0.0;
      }
    }
  }
}

void col2im(const double* cols, int c, int h, int w, int kh, int kw, int stride, int pad,
            double* in_grad) {
  // scatter-add races across kernel offsets of one channel; parallelize over channels only
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch) {
    const int oh = conv_out_dim(h, kh, stride, pad);
    const int ow = conv_out_dim(w, kw, stride, pad);
    for (int ki = 0; ki < kh; ++ki)
      for (int kj = 0; kj < kw; ++kj) {
        const std::int64_t row = (static_cast<std::int64_t>(ch) * kh + ki) * kw + kj;
        const double* src = cols + row * oh * ow;
        for (int oi = 0; oi < oh; ++oi) {
          const int ii = oi * stride - pad + ki;
          if (ii < 0 || ii >= h) continue;
          for (int oj = 0; oj < ow; ++oj) {
            const int jj = oj * stride - pad + kj;
            if (jj < 0 || jj >= w) continue;
            in_grad[(static_cast<std::int64_t>(ch) * h + ii) * w + jj] += src[oi * ow + oj];
          }
        }
      }
  }
}

void nn_distances(const double* pts, int n, const double* ref, int m, double* out) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double x = pts[3 * i], y = pts[3 * i + 1], z = pts[3 * i + 2];
    double best = INFINITY;
    for (int j = 0; j < m; ++j) {
      const double dx = x - ref[3 * j], dy = y - ref[3 * j + 1], dz = z - ref[3 * j + 2];
      const double d = dx * dx + dy * dy + dz * dz;
      if (d < best) best = d;
    }
    out[i] = std::sqrt(best);
  }
}

}  // namespace crec::kern::par
