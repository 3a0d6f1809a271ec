// Benchmark of the OpenMP kernels against the serial reference
// implementations. Run with OMP_NUM_THREADS set to taste.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "sslp/core/parallel.hpp"
#include "sslp/core/rng.hpp"
#include "sslp/nn/kernels.hpp"
#include "sslp/priors.hpp"
#include "sslp/ref/naive.hpp"

using namespace sslp;

namespace {

double time_ms(const std::function<void()>& fn, int iters) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
}

Tensor random_tensor(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (float& v : t.v) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

}  // namespace

int main() {
  Rng rng(42);
  std::printf("threads: %d\n\n", par::max_threads());
  std::printf("%-34s %10s %10s %8s\n", "kernel", "omp ms", "serial ms", "speedup");

  {
    const int m = 256, k = 512, n = 512;
    Tensor a = random_tensor({m, k}, rng), b = random_tensor({k, n}, rng), c({m, n});
    const double omp_ms = time_ms([&] { nn::gemm_nn(a.data(), b.data(), c.data(), m, k, n); }, 20);
    const double ref_ms =
        time_ms([&] { ref::gemm_naive(a.data(), b.data(), c.data(), m, k, n); }, 3);
    std::printf("%-34s %10.3f %10.3f %7.2fx\n", "gemm 256x512x512", omp_ms, ref_ms,
                ref_ms / omp_ms);
  }

  {
    const int n = 32, c = 16, h = 64, w = 64, oc = 32;
    Tensor x = random_tensor({n, c, h, w}, rng);
    Tensor weight = random_tensor({oc, c, 3, 3}, rng);
    Tensor bias = random_tensor({oc}, rng);
    Tensor y;
    const int oh = nn::conv_out_dim(h, 3, 2, 1), ow = nn::conv_out_dim(w, 3, 2, 1);
    std::vector<float> y_ref(static_cast<std::size_t>(n) * oc * oh * ow);
    const double omp_ms =
        time_ms([&] { nn::conv2d_forward(x, weight, bias, 2, 1, y, nullptr); }, 10);
    const double ref_ms = time_ms(
        [&] {
          ref::conv2d_nchw_naive(x.data(), n, c, h, w, weight.data(), bias.data(), oc, 3, 2, 1,
                                 y_ref.data(), oh, ow);
        },
        3);
    std::printf("%-34s %10.3f %10.3f %7.2fx\n", "conv2d 32x16x64x64 -> 32ch s2", omp_ms, ref_ms,
                ref_ms / omp_ms);
  }

  {
    Image img(3, 96, 96, 0.0f);
    Rng prng(7);
    for (float& v : img.v) v = static_cast<float>(prng.uniform());
    priors::PriorConfig cfg;
    cfg.kind = priors::FilterKind::sobel;
    const double omp_ms = time_ms([&] { (void)priors::sobel_prior(img, cfg); }, 10);

    // serial reference pipeline: dense double-loop convolutions
    Image lum = to_luminance(img);
    const double ref_ms = time_ms(
        [&] {
          std::vector<double> plane(lum.v.begin(), lum.v.end());
          const std::vector<double> kx = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
          const std::vector<double> ky = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
          auto gx = ref::conv2d_reflect(plane, lum.height, lum.width, kx, 3, 3);
          auto gy = ref::conv2d_reflect(plane, lum.height, lum.width, ky, 3, 3);
          volatile double sink = gx[0] + gy[0];
          (void)sink;
        },
        10);
    std::printf("%-34s %10.3f %10.3f %7.2fx\n", "sobel prior 3x96x96 (vs raw conv)", omp_ms,
                ref_ms, ref_ms / omp_ms);
  }

  return 0;
}
