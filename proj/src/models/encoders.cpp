#include <cmath>

#include "sslp/models.hpp"

namespace sslp::nn {

Arch arch_from_string(const std::string& s) {
  if (s == "small_conv") return Arch::small_conv;
  if (s == "resnet18_small_input") return Arch::resnet18_small_input;
  SSLP_CHECK(false, "unknown encoder arch: ", s);
  return Arch::small_conv;
}

const char* to_string(Arch a) {
  switch (a) {
    case Arch::small_conv: return "small_conv";
    case Arch::resnet18_small_input: return "resnet18_small_input";
  }
  return "?";
}

namespace {
int scaled(int base, double width) {
  return std::max(1, static_cast<int>(std::lround(base * width)));
}
}  // namespace

int EncoderConfig::derived_feature_dim() const {
  return arch == Arch::small_conv ? scaled(256, width) : scaled(512, width);
}

void EncoderConfig::validate() const {
  SSLP_CHECK(width > 0.0, "encoder width must be positive");
  SSLP_CHECK(feature_dim > 0, "feature_dim must be positive");
  SSLP_CHECK(feature_dim == derived_feature_dim(), "feature_dim ", feature_dim,
             " does not match arch/width (expected ", derived_feature_dim(), ")");
}

// ---------------- small_conv ----------------
// Four stride-2 conv/bn/relu blocks followed by global average pooling.

namespace {

struct ConvBlock {
  Conv2d conv;
  BatchNorm bn;

  struct Cache {
    Conv2d::Cache conv;
    BatchNorm::Cache bn;
    Tensor relu_out;
  };

  void build(const std::string& prefix, int in, int out, int stride) {
    conv.build(prefix + ".conv", in, out, 3, stride, 1);
    bn.build(prefix + ".bn", out);
  }
  Tensor forward(const Tensor& x, Cache* c, bool train) {
    Tensor y = conv.forward(x, c ? &c->conv : nullptr);
    y = bn.forward(y, c ? &c->bn : nullptr, train);
    y = relu(y);
    if (c) c->relu_out = y;
    return y;
  }
  Tensor backward(const Tensor& dy, const Cache& c, bool need_dx) {
    Tensor d = relu_backward(dy, c.relu_out);
    d = bn.backward(d, c.bn);
    return conv.backward(d, c.conv, need_dx);
  }
  void collect_params(std::vector<Param*>& out) {
    out.push_back(&conv.weight);
    out.push_back(&conv.bias);
    out.push_back(&bn.gamma);
    out.push_back(&bn.beta);
  }
  void collect_state(std::vector<std::pair<std::string, Tensor*>>& out) {
    out.emplace_back(bn.gamma.name.substr(0, bn.gamma.name.size() - 6) + ".running_mean",
                     &bn.running_mean);
    out.emplace_back(bn.gamma.name.substr(0, bn.gamma.name.size() - 6) + ".running_var",
                     &bn.running_var);
  }
};

class SmallConvEncoder final : public Encoder {
 public:
  SmallConvEncoder(const EncoderConfig& cfg, const std::string& prefix) {
    const int base[4] = {32, 64, 128, 256};
    int in = 3;
    for (int i = 0; i < 4; ++i) {
      const int out = scaled(base[i], cfg.width);
      blocks_[i].build(prefix + ".block." + std::to_string(i), in, out, 2);
      in = out;
    }
    feature_dim_ = in;
  }

  struct Cache final : CacheBase {
    ConvBlock::Cache blocks[4];
    int h = 0, w = 0;  // pre-pool spatial size
  };

  int feature_dim() const override { return feature_dim_; }
  std::unique_ptr<CacheBase> new_cache() const override { return std::make_unique<Cache>(); }

  Tensor forward(const Tensor& x, CacheBase* cache, bool train) override {
    Cache* c = static_cast<Cache*>(cache);
    Tensor t = x;
    for (int i = 0; i < 4; ++i) t = blocks_[i].forward(t, c ? &c->blocks[i] : nullptr, train);
    if (c) {
      c->h = t.dim(2);
      c->w = t.dim(3);
    }
    return global_avg_pool(t);
  }

  Tensor backward(const Tensor& dfeat, const CacheBase& cache, bool need_dx) override {
    const Cache& c = static_cast<const Cache&>(cache);
    Tensor d = global_avg_pool_backward(dfeat, c.h, c.w);
    for (int i = 3; i >= 0; --i) d = blocks_[i].backward(d, c.blocks[i], need_dx || i > 0);
    return d;
  }

  void collect_params(std::vector<Param*>& out) override {
    for (auto& b : blocks_) b.collect_params(out);
  }
  void collect_state(std::vector<std::pair<std::string, Tensor*>>& out) override {
    for (auto& b : blocks_) b.collect_state(out);
  }
  void init(Rng& rng) override {
    for (auto& b : blocks_) b.conv.init(rng);
  }

 private:
  ConvBlock blocks_[4];
  int feature_dim_ = 0;
};

// ---------------- resnet18_small_input ----------------
// 3x3 stem without maxpool, four stages of two basic blocks.

struct BasicBlock {
  Conv2d conv1, conv2;
  BatchNorm bn1, bn2;
  bool has_shortcut = false;
  Conv2d sc_conv;
  BatchNorm sc_bn;

  struct Cache {
    Conv2d::Cache c1, c2, sc;
    BatchNorm::Cache b1, b2, scb;
    Tensor relu1_out, relu2_out;
    Tensor identity;  // forward input when no projection shortcut
  };

  void build(const std::string& prefix, int in, int out, int stride) {
    conv1.build(prefix + ".conv.0", in, out, 3, stride, 1);
    bn1.build(prefix + ".bn.0", out);
    conv2.build(prefix + ".conv.1", out, out, 3, 1, 1);
    bn2.build(prefix + ".bn.1", out);
    has_shortcut = stride != 1 || in != out;
    if (has_shortcut) {
      sc_conv.build(prefix + ".shortcut.conv", in, out, 1, stride, 0);
      sc_bn.build(prefix + ".shortcut.bn", out);
    }
  }

  Tensor forward(const Tensor& x, Cache* c, bool train) {
    Tensor y = conv1.forward(x, c ? &c->c1 : nullptr);
    y = bn1.forward(y, c ? &c->b1 : nullptr, train);
    y = relu(y);
    if (c) c->relu1_out = y;
    y = conv2.forward(y, c ? &c->c2 : nullptr);
    y = bn2.forward(y, c ? &c->b2 : nullptr, train);
    Tensor skip;
    if (has_shortcut) {
      skip = sc_conv.forward(x, c ? &c->sc : nullptr);
      skip = sc_bn.forward(skip, c ? &c->scb : nullptr, train);
    } else {
      skip = x;
      if (c) c->identity = x;
    }
    for (std::int64_t i = 0; i < y.numel(); ++i) y.v[i] += skip.v[i];
    y = relu(y);
    if (c) c->relu2_out = y;
    return y;
  }

  Tensor backward(const Tensor& dy, const Cache& c, bool need_dx) {
    Tensor d = relu_backward(dy, c.relu2_out);
    Tensor dskip = d;  // gradient into the shortcut path
    Tensor dmain = bn2.backward(d, c.b2);
    dmain = conv2.backward(dmain, c.c2, true);
    dmain = relu_backward(dmain, c.relu1_out);
    dmain = bn1.backward(dmain, c.b1);
    Tensor dx = conv1.backward(dmain, c.c1, need_dx);
    if (has_shortcut) {
      Tensor ds = sc_bn.backward(dskip, c.scb);
      ds = sc_conv.backward(ds, c.sc, need_dx);
      if (need_dx)
        for (std::int64_t i = 0; i < dx.numel(); ++i) dx.v[i] += ds.v[i];
    } else if (need_dx) {
      for (std::int64_t i = 0; i < dx.numel(); ++i) dx.v[i] += dskip.v[i];
    }
    return dx;
  }

  void collect_params(std::vector<Param*>& out) {
    out.push_back(&conv1.weight);
    out.push_back(&conv1.bias);
    out.push_back(&bn1.gamma);
    out.push_back(&bn1.beta);
    out.push_back(&conv2.weight);
    out.push_back(&conv2.bias);
    out.push_back(&bn2.gamma);
    out.push_back(&bn2.beta);
    if (has_shortcut) {
      out.push_back(&sc_conv.weight);
      out.push_back(&sc_conv.bias);
      out.push_back(&sc_bn.gamma);
      out.push_back(&sc_bn.beta);
    }
  }
  void collect_state(std::vector<std::pair<std::string, Tensor*>>& out) {
    auto bn_state = [&](BatchNorm& bn) {
      const std::string stem = bn.gamma.name.substr(0, bn.gamma.name.size() - 6);
      out.emplace_back(stem + ".running_mean", &bn.running_mean);
      out.emplace_back(stem + ".running_var", &bn.running_var);
    };
    bn_state(bn1);
    bn_state(bn2);
    if (has_shortcut) bn_state(sc_bn);
  }
  void init(Rng& rng) {
    conv1.init(rng);
    conv2.init(rng);
    if (has_shortcut) sc_conv.init(rng);
  }
};

class ResNetEncoder final : public Encoder {
 public:
  ResNetEncoder(const EncoderConfig& cfg, const std::string& prefix) {
    const int c0 = scaled(64, cfg.width);
    stem_.build(prefix + ".stem", 3, c0, 1);
    int in = c0;
    const int base[4] = {64, 128, 256, 512};
    for (int s = 0; s < 4; ++s) {
      const int out = scaled(base[s], cfg.width);
      const int stride = s == 0 ? 1 : 2;
      blocks_[2 * s].build(prefix + ".stage." + std::to_string(s) + ".block.0", in, out, stride);
      blocks_[2 * s + 1].build(prefix + ".stage." + std::to_string(s) + ".block.1", out, out, 1);
      in = out;
    }
    feature_dim_ = in;
  }

  struct Cache final : CacheBase {
    ConvBlock::Cache stem;
    BasicBlock::Cache blocks[8];
    int h = 0, w = 0;
  };

  int feature_dim() const override { return feature_dim_; }
  std::unique_ptr<CacheBase> new_cache() const override { return std::make_unique<Cache>(); }

  Tensor forward(const Tensor& x, CacheBase* cache, bool train) override {
    Cache* c = static_cast<Cache*>(cache);
    Tensor t = stem_.forward(x, c ? &c->stem : nullptr, train);
    for (int i = 0; i < 8; ++i) t = blocks_[i].forward(t, c ? &c->blocks[i] : nullptr, train);
    if (c) {
      c->h = t.dim(2);
      c->w = t.dim(3);
    }
    return global_avg_pool(t);
  }

  Tensor backward(const Tensor& dfeat, const CacheBase& cache, bool need_dx) override {
    const Cache& c = static_cast<const Cache&>(cache);
    Tensor d = global_avg_pool_backward(dfeat, c.h, c.w);
    for (int i = 7; i >= 0; --i) d = blocks_[i].backward(d, c.blocks[i], true);
    return stem_.backward(d, c.stem, need_dx);
  }

  void collect_params(std::vector<Param*>& out) override {
    stem_.collect_params(out);
    for (auto& b : blocks_) b.collect_params(out);
  }
  void collect_state(std::vector<std::pair<std::string, Tensor*>>& out) override {
    stem_.collect_state(out);
    for (auto& b : blocks_) b.collect_state(out);
  }
  void init(Rng& rng) override {
    stem_.conv.init(rng);
    for (auto& b : blocks_) b.init(rng);
  }

 private:
  ConvBlock stem_;
  BasicBlock blocks_[8];
  int feature_dim_ = 0;
};

}  // namespace

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& cfg, const std::string& prefix) {
  cfg.validate();
  if (cfg.arch == Arch::small_conv) return std::make_unique<SmallConvEncoder>(cfg, prefix);
  return std::make_unique<ResNetEncoder>(cfg, prefix);
}

}  // namespace sslp::nn
