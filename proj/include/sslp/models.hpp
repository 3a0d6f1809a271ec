#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sslp/core/image.hpp"
#include "sslp/core/rng.hpp"
#include "sslp/core/tensor.hpp"

namespace sslp::nn {

enum class Method { simclr, simsiam, vicreg };
Method method_from_string(const std::string& s);
const char* to_string(Method m);

struct Param {
  std::string name;
  Tensor value, grad;

  void setup(std::string n, std::vector<int> shape) {
    name = std::move(n);
    value = Tensor(shape);
    grad = Tensor(std::move(shape));
  }
};

// ---------------- layers ----------------

struct Conv2d {
  int in_ch = 0, out_ch = 0, ksize = 3, stride = 1, pad = 1;
  Param weight, bias;

  struct Cache {
    Tensor cols;
    std::vector<int> x_shape;
  };

  void build(const std::string& name, int in, int out, int k, int s, int p);
  void init(Rng& rng);
  Tensor forward(const Tensor& x, Cache* cache) const;
  // accumulates weight/bias grads; returns dx when need_dx
  Tensor backward(const Tensor& dy, const Cache& cache, bool need_dx);
};

// Batch normalization over (N, C) or (N, C, H, W); batch statistics while
// training, frozen running statistics at evaluation.
struct BatchNorm {
  int channels = 0;
  float momentum = 0.1f, eps = 1e-5f;
  Param gamma, beta;
  Tensor running_mean, running_var;

  struct Cache {
    Tensor xhat;
    std::vector<float> invstd;
    bool train = false;
  };

  void build(const std::string& name, int c);
  Tensor forward(const Tensor& x, Cache* cache, bool train);
  Tensor backward(const Tensor& dy, const Cache& cache);
};

struct Linear {
  int in_dim = 0, out_dim = 0;
  Param weight, bias;  // weight[out, in]

  struct Cache {
    Tensor input;
  };

  void build(const std::string& name, int in, int out);
  void init(Rng& rng);
  Tensor forward(const Tensor& x, Cache* cache) const;
  Tensor backward(const Tensor& dy, const Cache& cache, bool need_dx);
};

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& dy, const Tensor& y);
Tensor global_avg_pool(const Tensor& x);                       // NCHW -> NC
Tensor global_avg_pool_backward(const Tensor& dy, int h, int w);

// ---------------- encoders ----------------

enum class Arch { small_conv, resnet18_small_input };
Arch arch_from_string(const std::string& s);
const char* to_string(Arch a);

struct EncoderConfig {
  Arch arch = Arch::small_conv;
  double width = 1.0;    // channel multiplier
  int feature_dim = 256; // must match what arch/width produces

  void validate() const;
  int derived_feature_dim() const;
};

struct Encoder {
  struct CacheBase {
    virtual ~CacheBase() = default;
  };
  virtual ~Encoder() = default;
  virtual int feature_dim() const = 0;
  virtual std::unique_ptr<CacheBase> new_cache() const = 0;
  virtual Tensor forward(const Tensor& x, CacheBase* cache, bool train) = 0;
  // returns dx when need_dx (PGD path); otherwise an empty tensor
  virtual Tensor backward(const Tensor& dfeat, const CacheBase& cache, bool need_dx) = 0;
  virtual void collect_params(std::vector<Param*>& out) = 0;
  virtual void collect_state(std::vector<std::pair<std::string, Tensor*>>& out) = 0;
  virtual void init(Rng& rng) = 0;
};

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& cfg, const std::string& prefix);

// ---------------- heads ----------------

struct HeadConfig {
  int projector_hidden = 2048;
  int projector_out = 128;
  int predictor_hidden = 512;
  bool use_predictor = false;  // simsiam only

  void validate(Method method) const;
};

// two affine layers with batch norm and relu between
struct Mlp {
  Linear l1;
  BatchNorm bn;
  Linear l2;

  struct Cache {
    Linear::Cache l1c;
    BatchNorm::Cache bnc;
    Tensor relu_out;
    Linear::Cache l2c;
  };

  void build(const std::string& prefix, int in, int hidden, int out);
  void init(Rng& rng);
  Tensor forward(const Tensor& x, Cache* cache, bool train);
  Tensor backward(const Tensor& dy, const Cache& cache);
  void collect_params(std::vector<Param*>& out);
  void collect_state(std::vector<std::pair<std::string, Tensor*>>& out);
};

// ---------------- the SSL network pair ----------------

struct ForwardOut {
  Tensor h;                  // encoder features
  Tensor z;                  // projector outputs
  std::optional<Tensor> y;   // predictor outputs (simsiam)
};

struct SslNetwork {
  std::unique_ptr<Encoder> encoder;
  Mlp projector;
  std::optional<Mlp> predictor;

  struct Cache {
    std::unique_ptr<Encoder::CacheBase> enc;
    Mlp::Cache proj;
    Mlp::Cache pred;
  };

  ForwardOut forward(const Tensor& batch, Cache* cache, bool train);
  // dz: gradient at projector output (incl. KL); dy: gradient at
  // predictor output. Returns dx when need_dx.
  Tensor backward(const Tensor& dz, const Tensor* dy, const Cache& cache, bool need_dx);
  void collect_params(std::vector<Param*>& out);
  void collect_state(std::vector<std::pair<std::string, Tensor*>>& out);
};

enum class Branch { main, prior };

struct ModelBundle {
  EncoderConfig encoder_cfg;
  HeadConfig head_cfg;
  Method method = Method::simclr;
  std::uint64_t seed = 0;

  SslNetwork main;
  std::unique_ptr<SslNetwork> prior;

  std::int64_t param_count() const;
  SslNetwork& branch(Branch b);
  void collect_params(std::vector<Param*>& out);
  void collect_state(std::vector<std::pair<std::string, Tensor*>>& out);
  void zero_grads();
  // FNV-1a over raw parameter + state bytes
  std::uint64_t checksum() const;
};

// Deterministic construction + initialization. The prior network, when
// requested, mirrors the SSL network architecture exactly with
// independently drawn values.
ModelBundle init_models(const EncoderConfig& encoder_cfg, const HeadConfig& head_cfg,
                        Method method, bool with_prior, std::uint64_t seed);

// h = encoder(batch); z = projector(h); y = predictor(z) when present.
ForwardOut forward_ssl(ModelBundle& bundle, const ImageBatch& batch, Branch branch,
                       bool train = false);

Tensor batch_to_tensor(const ImageBatch& batch);

}  // namespace sslp::nn
