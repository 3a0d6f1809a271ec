#include <doctest.h>

#include <cmath>

#include "sslp/core/parallel.hpp"
#include "sslp/core/rng.hpp"
#include "sslp/nn/kernels.hpp"
#include "sslp/ref/naive.hpp"

using namespace sslp;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (float& v : t.v) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("gemm variants match the naive triple loop") {
  Rng rng(17);
  const int m = 13, k = 29, n = 17;
  const Tensor a = random_tensor({m, k}, rng);
  const Tensor b = random_tensor({k, n}, rng);

  Tensor c({m, n}), c_ref({m, n});
  nn::gemm_nn(a.data(), b.data(), c.data(), m, k, n);
  ref::gemm_naive(a.data(), b.data(), c_ref.data(), m, k, n);
  for (std::int64_t i = 0; i < c.numel(); ++i)
    CHECK(c.v[i] == doctest::Approx(c_ref.v[i]).epsilon(1e-5));

  // A * B == A * (B^T)^T through gemm_nt
  Tensor bt({n, k});
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) bt.v[static_cast<std::size_t>(j) * k + i] = b.v[static_cast<std::size_t>(i) * n + j];
  Tensor c2({m, n});
  nn::gemm_nt(a.data(), bt.data(), c2.data(), m, k, n);
  for (std::int64_t i = 0; i < c.numel(); ++i)
    CHECK(c2.v[i] == doctest::Approx(c_ref.v[i]).epsilon(1e-5));

  Tensor at({k, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) at.v[static_cast<std::size_t>(j) * m + i] = a.v[static_cast<std::size_t>(i) * k + j];
  Tensor c3({m, n});
  nn::gemm_tn(at.data(), b.data(), c3.data(), m, k, n);
  for (std::int64_t i = 0; i < c.numel(); ++i)
    CHECK(c3.v[i] == doctest::Approx(c_ref.v[i]).epsilon(1e-5));
}

TEST_CASE("conv2d forward matches the naive reference") {
  Rng rng(23);
  for (int stride : {1, 2}) {
    const int n = 3, c = 4, h = 11, w = 9, oc = 5, ks = 3, pad = 1;
    const Tensor x = random_tensor({n, c, h, w}, rng);
    const Tensor weight = random_tensor({oc, c, ks, ks}, rng);
    const Tensor bias = random_tensor({oc}, rng);
    Tensor y;
    nn::conv2d_forward(x, weight, bias, stride, pad, y, nullptr);

    const int oh = nn::conv_out_dim(h, ks, stride, pad), ow = nn::conv_out_dim(w, ks, stride, pad);
    std::vector<float> y_ref(static_cast<std::size_t>(n) * oc * oh * ow);
    ref::conv2d_nchw_naive(x.data(), n, c, h, w, weight.data(), bias.data(), oc, ks, stride, pad,
                           y_ref.data(), oh, ow);
    REQUIRE(y.numel() == static_cast<std::int64_t>(y_ref.size()));
    for (std::int64_t i = 0; i < y.numel(); ++i)
      CHECK(y.v[i] == doctest::Approx(y_ref[static_cast<std::size_t>(i)]).epsilon(1e-5));
  }
}

TEST_CASE("conv2d backward matches finite differences on a scalar objective") {
  // objective: sum of conv output weighted by a fixed random matrix
  Rng rng(31);
  const int n = 2, c = 3, h = 6, w = 6, oc = 4, stride = 2, pad = 1, ks = 3;
  Tensor x = random_tensor({n, c, h, w}, rng);
  Tensor weight = random_tensor({oc, c, ks, ks}, rng);
  Tensor bias = random_tensor({oc}, rng);
  Tensor y, cols;
  nn::conv2d_forward(x, weight, bias, stride, pad, y, &cols);
  const Tensor proj = random_tensor(y.shape, rng);

  Tensor dweight(weight.shape), dbias(bias.shape), dx;
  nn::conv2d_backward(proj, weight, cols, x.shape, stride, pad, dweight, dbias, &dx);

  auto objective = [&](const Tensor& xx, const Tensor& ww, const Tensor& bb) {
    Tensor yy;
    nn::conv2d_forward(xx, ww, bb, stride, pad, yy, nullptr);
    double acc = 0.0;
    for (std::int64_t i = 0; i < yy.numel(); ++i) acc += static_cast<double>(proj.v[i]) * yy.v[i];
    return acc;
  };

  const float eps = 1e-2f;
  Rng pick(7);
  for (int trial = 0; trial < 12; ++trial) {
    // weight gradient
    std::size_t wi = pick.uniform_index(weight.v.size());
    Tensor wp = weight, wm = weight;
    wp.v[wi] += eps;
    wm.v[wi] -= eps;
    const double fd_w = (objective(x, wp, bias) - objective(x, wm, bias)) / (2.0 * eps);
    CHECK(dweight.v[wi] == doctest::Approx(fd_w).epsilon(2e-2));

    // input gradient
    std::size_t xi = pick.uniform_index(x.v.size());
    Tensor xp = x, xm = x;
    xp.v[xi] += eps;
    xm.v[xi] -= eps;
    const double fd_x = (objective(xp, weight, bias) - objective(xm, weight, bias)) / (2.0 * eps);
    CHECK(dx.v[xi] == doctest::Approx(fd_x).epsilon(2e-2));
  }
}

TEST_CASE("kernel outputs do not depend on the thread count") {
  Rng rng(41);
  const int n = 4, c = 3, h = 10, w = 10, oc = 6;
  const Tensor x = random_tensor({n, c, h, w}, rng);
  const Tensor weight = random_tensor({oc, c, 3, 3}, rng);
  const Tensor bias = random_tensor({oc}, rng);

  const int saved = par::max_threads();
  par::set_threads(1);
  Tensor y1;
  nn::conv2d_forward(x, weight, bias, 2, 1, y1, nullptr);
  par::set_threads(2);
  Tensor y2;
  nn::conv2d_forward(x, weight, bias, 2, 1, y2, nullptr);
  par::set_threads(saved);

  CHECK(y1.v == y2.v);  // bitwise
}

TEST_SUITE_END();
