#pragma once

#include "sslp/core/tensor.hpp"

namespace sslp::nn {

// GEMM-pattern kernels. Accumulation order over the contraction index is
// fixed and serial, and parallel loops only split independent output
// rows, so results are bitwise reproducible for any thread count.

// C[M,N] = A[M,K] * B[K,N]            (+= when accumulate)
void gemm_nn(const float* a, const float* b, float* c, int m, int k, int n,
             bool accumulate = false);
// C[M,N] = A[M,K] * B[N,K]^T
void gemm_nt(const float* a, const float* b, float* c, int m, int k, int n,
             bool accumulate = false);
// C[M,N] = A[K,M]^T * B[K,N]
void gemm_tn(const float* a, const float* b, float* c, int m, int k, int n,
             bool accumulate = false);

// Zero-padded im2col for one CHW sample: col[(ic*ks+ky)*ks+kx][oy*ow+ox].
void im2col(const float* x, int c, int h, int w, int ksize, int stride, int pad, float* col,
            int oh, int ow);
// Scatter-add transpose of im2col.
void col2im(const float* col, int c, int h, int w, int ksize, int stride, int pad, float* x,
            int oh, int ow);

int conv_out_dim(int in, int ksize, int stride, int pad);

// Batched NCHW convolution (parallel over samples). cols, when non-null,
// receives the per-sample im2col buffers [n][k*l] for the backward pass.
void conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                    int pad, Tensor& y, Tensor* cols);

// dW/db accumulate; dx is written when non-null.
void conv2d_backward(const Tensor& dy, const Tensor& weight, const Tensor& cols,
                     const std::vector<int>& x_shape, int stride, int pad, Tensor& dweight,
                     Tensor& dbias, Tensor* dx);

}  // namespace sslp::nn
