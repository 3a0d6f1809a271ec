#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "sslp/core/parallel.hpp"
#include "sslp/train.hpp"

namespace sslp::train {

namespace {

losses::EmbeddingBatch to_embedding(const Tensor& t) {
  losses::EmbeddingBatch e(t.dim(0), t.dim(1));
  for (std::size_t i = 0; i < t.v.size(); ++i) e.v[i] = t.v[i];
  return e;
}

void assert_finite(const losses::EmbeddingBatch& e, const char* term, std::int64_t step) {
  for (double v : e.v)
    SSLP_ASSERT(std::isfinite(v), "non-finite loss input '", term, "' at step ", step);
}

Tensor to_tensor(const losses::EmbeddingBatch& e, double scale = 1.0) {
  Tensor t({e.n, e.d});
  for (std::size_t i = 0; i < e.v.size(); ++i)
    t.v[i] = static_cast<float>(scale * e.v[i]);
  return t;
}

void add_scaled(Tensor& dst, const losses::EmbeddingBatch& src, double scale) {
  for (std::size_t i = 0; i < dst.v.size(); ++i)
    dst.v[i] += static_cast<float>(scale * src.v[i]);
}

priors::PriorConfig resolve_filter(const PriorOptions& p) {
  priors::PriorConfig f = p.filter;
  switch (p.mode) {
    case PriorMode::sobel: f.kind = priors::FilterKind::sobel; break;
    case PriorMode::prewitt: f.kind = priors::FilterKind::prewitt; break;
    case PriorMode::canny: f.kind = priors::FilterKind::canny; break;
    default: f.kind = priors::FilterKind::sobel; break;
  }
  return f;
}

// the fixed strong color-distortion transform of the network(color)
// ablation: full-strength jitter plus random grayscale
Image color_distort(const Image& img, Rng& rng) {
  augment::AugmentationSpec jitter;
  jitter.name = augment::TransformKind::color_jitter;
  jitter.probability = 1.0;
  jitter.jitter_brightness = 0.8;
  jitter.jitter_contrast = 0.8;
  jitter.jitter_saturation = 0.8;
  jitter.jitter_hue = 0.2;
  Image out = augment::apply_augmentation(jitter, img, rng);
  augment::AugmentationSpec gray;
  gray.name = augment::TransformKind::random_grayscale;
  gray.probability = 0.2;
  return augment::apply_augmentation(gray, out, rng);
}

struct SslGrads {
  losses::LossValue value;
  losses::EmbeddingBatch dz1, dz2;  // projector-output grads
  losses::EmbeddingBatch dy1, dy2;  // predictor-output grads (simsiam)
  bool has_dy = false;
};

SslGrads ssl_objective(const RunConfig& cfg, const losses::EmbeddingBatch& z1,
                       const losses::EmbeddingBatch& z2, const losses::EmbeddingBatch* y1,
                       const losses::EmbeddingBatch* y2) {
  SslGrads g;
  switch (cfg.method) {
    case nn::Method::simclr:
      g.value = losses::nt_xent(z1, z2, cfg.nt_xent_temperature, &g.dz1, &g.dz2);
      break;
    case nn::Method::vicreg:
      g.value = losses::vicreg_loss(z1, z2, cfg.vicreg, &g.dz1, &g.dz2);
      break;
    case nn::Method::simsiam: {
      SSLP_CHECK(y1 && y2, "simsiam objective needs predictor outputs");
      losses::EmbeddingBatch dz1_stop, dz2_stop;  // exact zeros by contract
      g.value = losses::simsiam_loss(*y1, *y2, z1, z2, &g.dy1, &g.dy2, &dz1_stop, &dz2_stop);
      g.dz1 = dz1_stop;
      g.dz2 = dz2_stop;
      g.has_dy = true;
      break;
    }
  }
  return g;
}

}  // namespace

TrainState init_train_state(const RunConfig& cfg) {
  cfg.validate();
  TrainState state;
  state.config = cfg;
  state.bundle = nn::init_models(cfg.encoder, cfg.head, cfg.method,
                                 uses_prior_network(cfg.prior.mode), cfg.seed);
  std::vector<nn::Param*> params;
  state.bundle.collect_params(params);
  state.opt.cfg = cfg.optimizer;
  state.opt.init(params);
  return state;
}

losses::LossValue pretrain_step(TrainState& state, const ImageBatch& raw_batch,
                                const std::vector<Rng>& sample_rngs, StepDebug* debug) {
  const RunConfig& cfg = state.config;
  const int b = raw_batch.n;
  SSLP_CHECK(b >= 2, "pretrain_step needs a batch of at least 2, got ", b);
  SSLP_CHECK(static_cast<int>(sample_rngs.size()) == b, "one rng per sample required");

  const augment::Pipeline pipeline = augment::make_pipeline(cfg.preset, cfg.out_h, cfg.out_w);
  const bool with_prior = state.bundle.prior != nullptr;
  const priors::PriorConfig filter = resolve_filter(cfg.prior);

  ImageBatch view1(b, 3, cfg.out_h, cfg.out_w), view2(b, 3, cfg.out_h, cfg.out_w);
  ImageBatch prior1, prior2;
  if (with_prior) {
    prior1 = ImageBatch(b, 3, cfg.out_h, cfg.out_w);
    prior2 = ImageBatch(b, 3, cfg.out_h, cfg.out_w);
  }

  par::parallel_for(b, [&](std::int64_t i) {
    const Image img = raw_batch.get_sample(static_cast<int>(i));
    const Rng& base = sample_rngs[static_cast<std::size_t>(i)];
    auto [v1, v2] = augment::two_views(img, pipeline, base);

    if (cfg.prior.mode == PriorMode::shape_as_augmentation) {
      // Table 5 "w/ shape as augm.": the filter joins the augmentation
      // list of the single network instead of feeding a second one
      Rng r1 = base.substream({5, 1});
      Rng r2 = base.substream({5, 2});
      priors::PriorConfig f = cfg.prior.filter;
      f.kind = priors::FilterKind::sobel;
      if (r1.uniform() < cfg.prior.shape_aug_probability) v1 = priors::apply_prior(v1, f);
      if (r2.uniform() < cfg.prior.shape_aug_probability) v2 = priors::apply_prior(v2, f);
    }

    view1.set_sample(static_cast<int>(i), v1);
    view2.set_sample(static_cast<int>(i), v2);

    if (!with_prior) return;
    Image p1, p2;
    if (cfg.prior.mode == PriorMode::color_distortion_network) {
      Rng r1 = base.substream({4, 1});
      Rng r2 = base.substream({4, 2});
      p1 = color_distort(v1, r1);
      p2 = color_distort(v2, r2);
    } else if (cfg.prior.filter_then_augment) {
      // literal order: filter the un-augmented input, then augment
      const Image filtered = priors::apply_prior(img, filter);
      auto [f1, f2] = augment::two_views(filtered, pipeline, base.substream({3}));
      p1 = std::move(f1);
      p2 = std::move(f2);
    } else {
      p1 = priors::apply_prior(v1, filter);
      p2 = priors::apply_prior(v2, filter);
    }
    prior1.set_sample(static_cast<int>(i), p1);
    prior2.set_sample(static_cast<int>(i), p2);
  });

  // forward both networks on both views
  nn::SslNetwork& main_net = state.bundle.main;
  nn::SslNetwork::Cache mc1, mc2, pc1, pc2;
  mc1.enc = main_net.encoder->new_cache();
  mc2.enc = main_net.encoder->new_cache();
  const nn::ForwardOut m1 = main_net.forward(nn::batch_to_tensor(view1), &mc1, true);
  const nn::ForwardOut m2 = main_net.forward(nn::batch_to_tensor(view2), &mc2, true);

  nn::ForwardOut p1, p2;
  if (with_prior) {
    nn::SslNetwork& prior_net = *state.bundle.prior;
    pc1.enc = prior_net.encoder->new_cache();
    pc2.enc = prior_net.encoder->new_cache();
    p1 = prior_net.forward(nn::batch_to_tensor(prior1), &pc1, true);
    p2 = prior_net.forward(nn::batch_to_tensor(prior2), &pc2, true);
  }

  const losses::EmbeddingBatch z1 = to_embedding(m1.z), z2 = to_embedding(m2.z);
  losses::EmbeddingBatch y1, y2;
  assert_finite(z1, "ssl_main(z)", state.step);
  assert_finite(z2, "ssl_main(z')", state.step);
  if (m1.y) {
    y1 = to_embedding(*m1.y);
    y2 = to_embedding(*m2.y);
    assert_finite(y1, "ssl_main(y)", state.step);
    assert_finite(y2, "ssl_main(y')", state.step);
  }

  const SslGrads main_g = ssl_objective(cfg, z1, z2, m1.y ? &y1 : nullptr, m2.y ? &y2 : nullptr);

  losses::LossValue total;
  losses::EmbeddingBatch zp1, zp2, yp1, yp2;
  SslGrads prior_g;
  losses::EmbeddingBatch dz1_kl, dzp1_kl, dz2_kl, dzp2_kl;
  double kl_scale = 0.0;

  if (with_prior) {
    zp1 = to_embedding(p1.z);
    zp2 = to_embedding(p2.z);
    assert_finite(zp1, "ssl_prior(z)", state.step);
    assert_finite(zp2, "ssl_prior(z')", state.step);
    if (p1.y) {
      yp1 = to_embedding(*p1.y);
      yp2 = to_embedding(*p2.y);
      assert_finite(yp1, "ssl_prior(y)", state.step);
      assert_finite(yp2, "ssl_prior(y')", state.step);
    }

    losses::LossValue prior_value;
    if (cfg.prior.prior_ssl_off) {
      prior_value.scalar = 0.0;
      prior_value.terms = {{"ssl_prior", 0.0, 1.0}};
    } else {
      prior_g = ssl_objective(cfg, zp1, zp2, p1.y ? &yp1 : nullptr, p2.y ? &yp2 : nullptr);
      prior_value = prior_g.value;
    }

    // view-aligned consistency: main z of view x vs prior z of view x_pr
    losses::LossValue kl1 = losses::prior_kl(z1, zp1, cfg.prior.kl_temperature,
                                             cfg.prior.kl_symmetric, &dz1_kl, &dzp1_kl);
    losses::LossValue kl;
    if (cfg.prior.kl_average_alignments) {
      losses::LossValue kl2 = losses::prior_kl(z2, zp2, cfg.prior.kl_temperature,
                                               cfg.prior.kl_symmetric, &dz2_kl, &dzp2_kl);
      kl.scalar = 0.5 * (kl1.scalar + kl2.scalar);
      kl.terms = {{"prior_kl", kl.scalar, 1.0}};
      kl_scale = 0.5;
    } else {
      kl = kl1;
      kl_scale = 1.0;
    }
    total = losses::total_loss(main_g.value, prior_value, kl, cfg.lambda);
  } else {
    total = losses::total_loss_baseline(main_g.value);
  }

  for (const losses::LossTerm& term : total.terms)
    SSLP_ASSERT(std::isfinite(term.value), "non-finite loss term '", term.name, "' at step ",
                state.step);

  // ---- backward ----
  state.bundle.zero_grads();

  Tensor dz1 = to_tensor(main_g.dz1), dz2 = to_tensor(main_g.dz2);
  if (with_prior) {
    add_scaled(dz1, dz1_kl, cfg.lambda * kl_scale);
    if (cfg.prior.kl_average_alignments) add_scaled(dz2, dz2_kl, cfg.lambda * kl_scale);
  }
  if (main_g.has_dy) {
    const Tensor dy1 = to_tensor(main_g.dy1), dy2 = to_tensor(main_g.dy2);
    main_net.backward(dz1, &dy1, mc1, false);
    main_net.backward(dz2, &dy2, mc2, false);
  } else {
    main_net.backward(dz1, nullptr, mc1, false);
    main_net.backward(dz2, nullptr, mc2, false);
  }

  if (with_prior) {
    Tensor dzp1 = cfg.prior.prior_ssl_off ? Tensor({zp1.n, zp1.d}) : to_tensor(prior_g.dz1);
    Tensor dzp2 = cfg.prior.prior_ssl_off ? Tensor({zp2.n, zp2.d}) : to_tensor(prior_g.dz2);
    if (!cfg.prior.stop_prior_side) {
      add_scaled(dzp1, dzp1_kl, cfg.lambda * kl_scale);
      if (cfg.prior.kl_average_alignments) add_scaled(dzp2, dzp2_kl, cfg.lambda * kl_scale);
    }
    nn::SslNetwork& prior_net = *state.bundle.prior;
    if (!cfg.prior.prior_ssl_off && prior_g.has_dy) {
      const Tensor dyp1 = to_tensor(prior_g.dy1), dyp2 = to_tensor(prior_g.dy2);
      prior_net.backward(dzp1, &dyp1, pc1, false);
      prior_net.backward(dzp2, &dyp2, pc2, false);
    } else {
      prior_net.backward(dzp1, nullptr, pc1, false);
      prior_net.backward(dzp2, nullptr, pc2, false);
    }
  }

  std::vector<nn::Param*> params;
  state.bundle.collect_params(params);
  const double lr = state.total_steps > 0
                        ? cosine_lr(cfg.optimizer.lr, state.step, state.total_steps)
                        : cfg.optimizer.lr;
  state.opt.step(params, lr);
  state.last_lr = lr;
  ++state.step;

  if (debug) {
    debug->view1 = view1;
    debug->view2 = view2;
    debug->prior_view1 = prior1;
    debug->prior_view2 = prior2;
    debug->z1 = z1;
    debug->z2 = z2;
    debug->y1 = y1;
    debug->y2 = y2;
    debug->zp1 = zp1;
    debug->zp2 = zp2;
    debug->yp1 = yp1;
    debug->yp2 = yp2;
  }
  return total;
}

std::string metrics_csv_header() {
  return "step,epoch,lr,total,ssl_main,ssl_prior,pk,wallclock_s";
}

namespace {
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
}  // namespace

std::string metrics_csv_row(const MetricsRow& r) {
  std::string out = std::to_string(r.step) + "," + std::to_string(r.epoch);
  for (double v : {r.lr, r.total, r.ssl_main, r.ssl_prior, r.pk, r.wallclock_s})
    out += "," + fmt_double(v);
  return out;
}

namespace {

TrainState run_loop(TrainState state, const data::LabeledDataset& ds,
                    const std::string& out_dir) {
  const RunConfig& cfg = state.config;
  const int n = static_cast<int>(ds.size());
  SSLP_CHECK(cfg.epochs == 0 || n >= cfg.batch_size, "dataset of ", n,
             " samples is smaller than one batch (", cfg.batch_size, ")");

  const int steps_per_epoch = cfg.batch_size > 0 ? n / cfg.batch_size : 0;
  state.total_steps = static_cast<std::int64_t>(steps_per_epoch) * cfg.epochs;

  namespace fs = std::filesystem;
  std::ofstream metrics;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    metrics.open(fs::path(out_dir) / "metrics.csv");
    metrics << metrics_csv_header() << "\n";
    // restored rows first, so a resumed run reproduces the full file
    for (const MetricsRow& row : state.history) metrics << metrics_csv_row(row) << "\n";
  }

  const auto t0 = std::chrono::steady_clock::now();
  while (state.epoch < cfg.epochs) {
    const int epoch = state.epoch;
    const std::vector<int> order = epoch_order(cfg.seed, epoch, n);
    for (int s = 0; s < steps_per_epoch; ++s) {
      const Image& first = ds.images[static_cast<std::size_t>(order[s * cfg.batch_size])];
      ImageBatch raw(cfg.batch_size, first.channels, first.height, first.width);
      std::vector<Rng> rngs;
      rngs.reserve(static_cast<std::size_t>(cfg.batch_size));
      for (int i = 0; i < cfg.batch_size; ++i) {
        const int idx = order[s * cfg.batch_size + i];
        raw.set_sample(i, ds.images[static_cast<std::size_t>(idx)]);
        rngs.push_back(sample_rng(cfg.seed, epoch, idx));
      }
      const losses::LossValue loss = pretrain_step(state, raw, rngs);

      if (state.step % cfg.log_interval == 0 || state.step == state.total_steps) {
        MetricsRow row;
        row.step = state.step;
        row.epoch = epoch;
        row.lr = state.last_lr;
        row.total = loss.scalar;
        row.ssl_main = loss.has_term("ssl_main") ? loss.term("ssl_main") : loss.scalar;
        row.ssl_prior = loss.has_term("ssl_prior") ? loss.term("ssl_prior") : 0.0;
        row.pk = loss.has_term("pk") ? loss.term("pk") : 0.0;
        row.wallclock_s =
            cfg.deterministic
                ? 0.0
                : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        state.history.push_back(row);
        if (metrics.is_open()) metrics << metrics_csv_row(row) << "\n";
      }
    }
    ++state.epoch;
    if (!out_dir.empty() && cfg.checkpoint_interval > 0 &&
        state.epoch % cfg.checkpoint_interval == 0 && state.epoch < cfg.epochs) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_epoch%04d.sslck", state.epoch);
      save_state(state, (fs::path(out_dir) / name).string());
    }
  }

  if (!out_dir.empty()) {
    metrics.close();
    save_state(state, (fs::path(out_dir) / "checkpoint.sslck").string());
  }
  return state;
}

}  // namespace

TrainState pretrain_run(const RunConfig& cfg, const data::LabeledDataset& ds,
                        const std::string& out_dir) {
  cfg.validate();
  return run_loop(init_train_state(cfg), ds, out_dir);
}

TrainState resume_run(TrainState state, const data::LabeledDataset& ds,
                      const std::string& out_dir) {
  return run_loop(std::move(state), ds, out_dir);
}

}  // namespace sslp::train
