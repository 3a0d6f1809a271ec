#pragma once

#include <vector>

namespace sslp::ref {

// Serial reference implementations, deliberately written as plain dense
// loops with no shared code paths into the main library. Tests use them
// as oracles; the kernel benchmark compares against them.

// Dense 2-D convolution (correlation) of a single plane with an
// arbitrary odd-sized kernel, reflect-101 borders, double precision.
std::vector<double> conv2d_reflect(const std::vector<double>& img, int h, int w,
                                   const std::vector<double>& kernel, int kh, int kw);

// C = A(MxK) * B(KxN), scalar triple loop.
void gemm_naive(const float* a, const float* b, float* c, int m, int k, int n);

// NCHW convolution with zero padding, matching the training kernel's
// contract (stride, pad, bias).
void conv2d_nchw_naive(const float* x, int n, int c, int h, int w, const float* weight,
                       const float* bias, int oc, int ksize, int stride, int pad, float* y,
                       int oh, int ow);

}  // namespace sslp::ref
