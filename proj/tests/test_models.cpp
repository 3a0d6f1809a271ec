#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "sslp/checkpoint.hpp"
#include "sslp/models.hpp"
#include "sslp/priors.hpp"

using namespace sslp;
using namespace sslp::nn;

namespace {

EncoderConfig small_encoder() {
  EncoderConfig cfg;
  cfg.arch = Arch::small_conv;
  cfg.width = 0.125;  // channels 4-8-16-32
  cfg.feature_dim = cfg.derived_feature_dim();
  return cfg;
}

HeadConfig small_head(Method method) {
  HeadConfig cfg;
  cfg.projector_hidden = 16;
  cfg.projector_out = 8;
  cfg.predictor_hidden = 8;
  cfg.use_predictor = method == Method::simsiam;
  return cfg;
}

ImageBatch random_batch(int n, int size, std::uint64_t seed) {
  Rng rng(seed);
  ImageBatch batch(n, 3, size, size);
  for (float& v : batch.v) v = static_cast<float>(rng.uniform());
  return batch;
}

}  // namespace

TEST_SUITE_BEGIN("models");

TEST_CASE("same seed gives identical parameter checksums") {
  const ModelBundle a = init_models(small_encoder(), small_head(Method::simclr), Method::simclr,
                                    true, 42);
  const ModelBundle b = init_models(small_encoder(), small_head(Method::simclr), Method::simclr,
                                    true, 42);
  const ModelBundle c = init_models(small_encoder(), small_head(Method::simclr), Method::simclr,
                                    true, 43);
  CHECK(a.checksum() == b.checksum());
  CHECK(a.checksum() != c.checksum());
}

TEST_CASE("predictor exists exactly for simsiam") {
  const ModelBundle simclr =
      init_models(small_encoder(), small_head(Method::simclr), Method::simclr, false, 1);
  CHECK(!simclr.main.predictor.has_value());

  const ModelBundle simsiam =
      init_models(small_encoder(), small_head(Method::simsiam), Method::simsiam, false, 1);
  CHECK(simsiam.main.predictor.has_value());

  HeadConfig wrong = small_head(Method::simclr);
  wrong.use_predictor = true;
  CHECK_THROWS(init_models(small_encoder(), wrong, Method::simclr, false, 1));
}

TEST_CASE("projector maps feature_dim -> hidden -> out") {
  EncoderConfig enc;
  enc.arch = Arch::small_conv;
  enc.width = 1.0;
  enc.feature_dim = 256;
  HeadConfig head;
  head.projector_hidden = 2048;
  head.projector_out = 64;
  head.use_predictor = false;
  ModelBundle bundle = init_models(enc, head, Method::vicreg, false, 3);
  CHECK(bundle.main.projector.l1.weight.value.shape == std::vector<int>{2048, 256});
  CHECK(bundle.main.projector.l2.weight.value.shape == std::vector<int>{64, 2048});
}

TEST_CASE("feature_dim must match arch and width") {
  EncoderConfig enc;
  enc.arch = Arch::small_conv;
  enc.width = 1.0;
  enc.feature_dim = 100;  // small_conv at width 1 ends at 256
  CHECK_THROWS(init_models(enc, small_head(Method::simclr), Method::simclr, false, 1));
}

TEST_CASE("architecture symmetry between SSL and prior networks") {
  ModelBundle bundle = init_models(small_encoder(), small_head(Method::simsiam), Method::simsiam,
                                   true, 9);
  std::vector<Param*> main_params, all_params;
  bundle.main.collect_params(main_params);
  bundle.collect_params(all_params);
  REQUIRE(all_params.size() == 2 * main_params.size());

  bool any_differ = false;
  for (std::size_t i = 0; i < main_params.size(); ++i) {
    Param* mp = all_params[i];
    Param* pp = all_params[main_params.size() + i];
    CHECK(mp->value.shape == pp->value.shape);           // shapes equal
    CHECK(pp->name == "prior_" + mp->name);
    if (mp->value.v != pp->value.v) any_differ = true;   // values independent
  }
  CHECK(any_differ);
}

TEST_CASE("forward shapes and eval-mode determinism") {
  for (Method method : {Method::simclr, Method::simsiam, Method::vicreg}) {
    ModelBundle bundle =
        init_models(small_encoder(), small_head(method), method, false, 11);
    const ImageBatch batch = random_batch(4, 16, 5);
    const ForwardOut out = forward_ssl(bundle, batch, Branch::main, false);
    CHECK(out.h.shape == std::vector<int>{4, small_encoder().feature_dim});
    CHECK(out.z.shape == std::vector<int>{4, 8});
    CHECK(out.y.has_value() == (method == Method::simsiam));

    const ForwardOut again = forward_ssl(bundle, batch, Branch::main, false);
    CHECK(out.z.v == again.z.v);  // bitwise
  }
}

TEST_CASE("identical rows in, identical rows out (eval mode)") {
  ModelBundle bundle =
      init_models(small_encoder(), small_head(Method::simclr), Method::simclr, false, 13);
  ImageBatch batch = random_batch(3, 16, 7);
  // make samples 0 and 2 identical
  std::copy(batch.sample(0), batch.sample(0) + 3 * 16 * 16, batch.sample(2));
  const ForwardOut out = forward_ssl(bundle, batch, Branch::main, false);
  for (int j = 0; j < out.z.dim(1); ++j)
    CHECK(out.z.v[static_cast<std::size_t>(j)] ==
          out.z.v[static_cast<std::size_t>(2 * out.z.dim(1) + j)]);
}

TEST_CASE("prior branch stays finite on all-zero edge maps") {
  ModelBundle bundle =
      init_models(small_encoder(), small_head(Method::vicreg), Method::vicreg, true, 17);
  const ImageBatch zeros(4, 3, 16, 16);
  const ForwardOut out = forward_ssl(bundle, zeros, Branch::prior, false);
  for (float v : out.z.v) CHECK(std::isfinite(v));
  for (float v : out.h.v) CHECK(std::isfinite(v));
}

TEST_CASE("outputs finite for random inputs in [0,1], both archs") {
  EncoderConfig resnet;
  resnet.arch = Arch::resnet18_small_input;
  resnet.width = 0.125;
  resnet.feature_dim = resnet.derived_feature_dim();
  for (const EncoderConfig& enc : {small_encoder(), resnet}) {
    ModelBundle bundle = init_models(enc, small_head(Method::simclr), Method::simclr, false, 19);
    const ImageBatch batch = random_batch(2, 32, 23);
    const ForwardOut train_out = forward_ssl(bundle, batch, Branch::main, true);
    const ForwardOut eval_out = forward_ssl(bundle, batch, Branch::main, false);
    for (float v : train_out.z.v) CHECK(std::isfinite(v));
    for (float v : eval_out.z.v) CHECK(std::isfinite(v));
  }
}

TEST_CASE("checkpoint roundtrip restores parameters bitwise") {
  ModelBundle bundle =
      init_models(small_encoder(), small_head(Method::simsiam), Method::simsiam, true, 29);
  const std::uint64_t before = bundle.checksum();

  CheckpointData ck;
  ck.manifest = bundle_manifest(bundle);
  ck.tensors = bundle_tensors(bundle);
  const std::string path =
      (std::filesystem::temp_directory_path() / "sslp_model_ck.sslck").string();
  save_checkpoint(path, ck);

  const CheckpointData loaded = load_checkpoint(path);
  ModelBundle restored = bundle_from_manifest(loaded.manifest);
  restored.main.projector.l1.weight.value.v[0] += 1.0f;  // make it differ
  CHECK(restored.checksum() != before);
  load_bundle_tensors(restored, loaded);
  CHECK(restored.checksum() == before);

  // mismatched architecture refuses to load
  EncoderConfig other = small_encoder();
  other.width = 0.25;
  other.feature_dim = other.derived_feature_dim();
  ModelBundle wrong = init_models(other, small_head(Method::simsiam), Method::simsiam, true, 29);
  CHECK_THROWS(load_bundle_tensors(wrong, loaded));
  std::filesystem::remove(path);
}

TEST_CASE("encoder backward reaches the input (both archs)") {
  EncoderConfig resnet;
  resnet.arch = Arch::resnet18_small_input;
  resnet.width = 0.125;
  resnet.feature_dim = resnet.derived_feature_dim();
  for (const EncoderConfig& enc : {small_encoder(), resnet}) {
    ModelBundle bundle = init_models(enc, small_head(Method::simclr), Method::simclr, false, 31);
    const ImageBatch batch = random_batch(2, 16, 37);
    auto cache = bundle.main.encoder->new_cache();
    const Tensor h = bundle.main.encoder->forward(batch_to_tensor(batch), cache.get(), false);
    Tensor dh(h.shape);
    for (float& v : dh.v) v = 1.0f;
    const Tensor dx = bundle.main.encoder->backward(dh, *cache, true);
    CHECK(dx.shape == std::vector<int>{2, 3, 16, 16});
    double mag = 0.0;
    for (float v : dx.v) {
      CHECK(std::isfinite(v));
      mag += std::abs(v);
    }
    CHECK(mag > 0.0);
  }
}

TEST_SUITE_END();
