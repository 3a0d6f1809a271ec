#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"

using namespace sslp;
using losses::EmbeddingBatch;
using losses::LossValue;

TEST_SUITE_BEGIN("losses");

TEST_CASE("nt_xent: single pair collapses to zero") {
  EmbeddingBatch z(1, 4), zp(1, 4);
  z.at(0, 0) = 1.0;
  zp.at(0, 1) = 1.0;
  const LossValue v = losses::nt_xent(z, zp, 0.5);
  CHECK(v.scalar == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("nt_xent: orthonormal pairs match the 4x4 brute-force oracle") {
  EmbeddingBatch z(2, 2), zp(2, 2);
  z.at(0, 0) = 1.0;   // e1
  zp.at(0, 0) = 1.0;  // e1
  z.at(1, 1) = 1.0;   // e2
  zp.at(1, 1) = 1.0;  // e2
  const LossValue v = losses::nt_xent(z, zp, 1.0);
  // explicit: every anchor sees positive sim 1, two negatives sim 0, one
  // negative sim 1 (its duplicate) -> loss = log(e + 2) - 1
  const double expected = std::log(std::exp(1.0) + 2.0) - 1.0;
  CHECK(v.scalar == doctest::Approx(expected).epsilon(1e-12));
  CHECK(v.scalar == doctest::Approx(oracles::nt_xent_bf(z, zp, 1.0)).epsilon(1e-12));
}

TEST_CASE("nt_xent: invariant to common rescaling and pair permutation") {
  Rng rng(1);
  const EmbeddingBatch z = oracles::random_embedding(5, 7, rng);
  const EmbeddingBatch zp = oracles::random_embedding(5, 7, rng);
  const double base = losses::nt_xent(z, zp, 0.5).scalar;

  EmbeddingBatch z3 = z, zp3 = zp;
  for (double& v : z3.v) v *= 3.0;
  for (double& v : zp3.v) v *= 3.0;
  CHECK(losses::nt_xent(z3, zp3, 0.5).scalar == doctest::Approx(base).epsilon(1e-9));

  // permute pairs jointly
  const int perm[5] = {3, 0, 4, 1, 2};
  EmbeddingBatch zq(5, 7), zpq(5, 7);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 7; ++j) {
      zq.at(i, j) = z.at(perm[i], j);
      zpq.at(i, j) = zp.at(perm[i], j);
    }
  CHECK(losses::nt_xent(zq, zpq, 0.5).scalar == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("nt_xent rejects zero-norm rows") {
  EmbeddingBatch z(2, 3), zp(2, 3);
  z.at(0, 0) = 1.0;
  z.at(1, 1) = 1.0;
  zp.at(0, 0) = 1.0;  // zp row 1 left at zero
  CHECK_THROWS(losses::nt_xent(z, zp, 0.5));
}

TEST_CASE("simsiam: identical and orthogonal rows") {
  EmbeddingBatch y(2, 3), yp(2, 3), z(2, 3), zp(2, 3);
  for (int i = 0; i < 2; ++i) {
    y.at(i, 0) = 1.0;
    zp.at(i, 0) = 1.0;  // y == z'
    yp.at(i, 1) = 1.0;
    z.at(i, 1) = 1.0;  // y' == z
  }
  CHECK(losses::simsiam_loss(y, yp, z, zp).scalar == doctest::Approx(-1.0).epsilon(1e-12));

  // orthogonal: y _|_ z' and y' _|_ z
  EmbeddingBatch zo(2, 3), zpo(2, 3);
  for (int i = 0; i < 2; ++i) {
    zpo.at(i, 1) = 1.0;
    zo.at(i, 0) = 1.0;
  }
  CHECK(losses::simsiam_loss(y, yp, zo, zpo).scalar == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("simsiam: 45-degree case matches the dot-product oracle") {
  const double s = 1.0 / std::sqrt(2.0);
  EmbeddingBatch y(1, 2), yp(1, 2), z(1, 2), zp(1, 2);
  y.at(0, 0) = 1.0;
  zp.at(0, 0) = s;
  zp.at(0, 1) = s;
  yp.at(0, 0) = s;
  yp.at(0, 1) = s;
  z.at(0, 0) = 1.0;
  const LossValue v = losses::simsiam_loss(y, yp, z, zp);
  CHECK(v.scalar == doctest::Approx(-std::cos(3.14159265358979 / 4)).epsilon(1e-9));
  CHECK(v.scalar == doctest::Approx(oracles::simsiam_bf(y, yp, z, zp)).epsilon(1e-12));
}

TEST_CASE("simsiam: stopped-path gradients are exactly zero") {
  Rng rng(2);
  const EmbeddingBatch y = oracles::random_embedding(4, 8, rng);
  const EmbeddingBatch yp = oracles::random_embedding(4, 8, rng);
  const EmbeddingBatch z = oracles::random_embedding(4, 8, rng);
  const EmbeddingBatch zp = oracles::random_embedding(4, 8, rng);
  EmbeddingBatch dy, dyp, dz, dzp;
  losses::simsiam_loss(y, yp, z, zp, &dy, &dyp, &dz, &dzp);
  for (double g : dz.v) CHECK(g == 0.0);
  for (double g : dzp.v) CHECK(g == 0.0);
  // and the live path is not all zero
  double live = 0.0;
  for (double g : dy.v) live += std::abs(g);
  CHECK(live > 0.0);
}

TEST_CASE("vicreg: term structure on constructed inputs") {
  Rng rng(3);
  losses::VicregParams params;

  // z == z' -> invariance 0
  const EmbeddingBatch z = oracles::random_embedding(5, 4, rng);
  const LossValue same = losses::vicreg_loss(z, z, params);
  CHECK(same.term("invariance") == doctest::Approx(0.0).epsilon(1e-12));

  // all stds above gamma -> variance term 0
  EmbeddingBatch spread(4, 2), spread2(4, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) {
      spread.at(i, j) = 10.0 * i + j;
      spread2.at(i, j) = -7.0 * i + j;
    }
  const LossValue hinged = losses::vicreg_loss(spread, spread2, params);
  CHECK(hinged.term("variance") == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("vicreg: integer toy matrices match the dense-formula oracle") {
  losses::VicregParams params;
  EmbeddingBatch z(3, 2), zp(3, 2);
  const double zv[3][2] = {{1, 2}, {3, 5}, {4, 0}};
  const double zpv[3][2] = {{0, 1}, {2, 2}, {5, 3}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      z.at(i, j) = zv[i][j];
      zp.at(i, j) = zpv[i][j];
    }
  const LossValue got = losses::vicreg_loss(z, zp, params);
  CHECK(got.scalar == doctest::Approx(oracles::vicreg_bf(z, zp, params)).epsilon(1e-12));

  params.unweighted = true;
  const LossValue raw = losses::vicreg_loss(z, zp, params);
  CHECK(raw.scalar == doctest::Approx(oracles::vicreg_bf(z, zp, params)).epsilon(1e-12));
  CHECK(raw.scalar ==
        doctest::Approx(raw.term("variance") + raw.term("invariance") + raw.term("covariance"))
            .epsilon(1e-9));
}

TEST_CASE("vicreg rejects single-sample batches") {
  EmbeddingBatch z(1, 4), zp(1, 4);
  z.at(0, 0) = zp.at(0, 0) = 1.0;
  CHECK_THROWS(losses::vicreg_loss(z, zp, losses::VicregParams{}));
}

TEST_CASE("prior_kl: closed-form two-category case") {
  EmbeddingBatch a(1, 2), b(1, 2);
  a.at(0, 0) = 1.0;
  b.at(0, 1) = 1.0;
  const double e = std::exp(1.0);
  const double p0 = e / (1.0 + e), p1 = 1.0 / (1.0 + e);
  const double expected = p0 * std::log(p0 / p1) + p1 * std::log(p1 / p0);
  const LossValue v = losses::prior_kl(a, b, 1.0);
  CHECK(v.scalar == doctest::Approx(expected).epsilon(1e-12));
  CHECK(v.scalar == doctest::Approx(oracles::prior_kl_bf(a, b, 1.0)).epsilon(1e-12));
}

TEST_CASE("prior_kl: zero for identical inputs, non-negative always") {
  Rng rng(4);
  const EmbeddingBatch a = oracles::random_embedding(6, 9, rng);
  CHECK(losses::prior_kl(a, a, 0.7).scalar == doctest::Approx(0.0).epsilon(1e-12));
  for (int trial = 0; trial < 20; ++trial) {
    const EmbeddingBatch x = oracles::random_embedding(4, 6, rng);
    const EmbeddingBatch y = oracles::random_embedding(4, 6, rng);
    CHECK(losses::prior_kl(x, y, 1.0).scalar >= 0.0);
    CHECK(losses::prior_kl(x, y, 1.0, true).scalar >= 0.0);
  }
}

TEST_CASE("loss oracle equivalence on random batches") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(7));
    const int d = 2 + static_cast<int>(rng.uniform_index(15));
    const EmbeddingBatch z = oracles::random_embedding(n, d, rng);
    const EmbeddingBatch zp = oracles::random_embedding(n, d, rng);
    const EmbeddingBatch y = oracles::random_embedding(n, d, rng);
    const EmbeddingBatch yp = oracles::random_embedding(n, d, rng);

    CHECK(losses::nt_xent(z, zp, 0.5).scalar ==
          doctest::Approx(oracles::nt_xent_bf(z, zp, 0.5)).epsilon(1e-9));
    CHECK(losses::simsiam_loss(y, yp, z, zp).scalar ==
          doctest::Approx(oracles::simsiam_bf(y, yp, z, zp)).epsilon(1e-9));
    losses::VicregParams params;
    CHECK(losses::vicreg_loss(z, zp, params).scalar ==
          doctest::Approx(oracles::vicreg_bf(z, zp, params)).epsilon(1e-9));
    CHECK(losses::prior_kl(z, zp, 1.0).scalar ==
          doctest::Approx(oracles::prior_kl_bf(z, zp, 1.0)).epsilon(1e-9));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(6);
  const EmbeddingBatch z = oracles::random_embedding(4, 8, rng);
  const EmbeddingBatch zp = oracles::random_embedding(4, 8, rng);
  const EmbeddingBatch y = oracles::random_embedding(4, 8, rng);
  const EmbeddingBatch yp = oracles::random_embedding(4, 8, rng);

  SUBCASE("nt_xent") {
    EmbeddingBatch dz, dzp;
    losses::nt_xent(z, zp, 0.5, &dz, &dzp);
    const auto fd_z = oracles::finite_diff(
        [&](const EmbeddingBatch& x) { return losses::nt_xent(x, zp, 0.5).scalar; }, z);
    const auto fd_zp = oracles::finite_diff(
        [&](const EmbeddingBatch& x) { return losses::nt_xent(z, x, 0.5).scalar; }, zp);
    CHECK(oracles::max_rel_error(dz, fd_z) < 1e-4);
    CHECK(oracles::max_rel_error(dzp, fd_zp) < 1e-4);
  }
  SUBCASE("simsiam") {
    EmbeddingBatch dy, dyp, dz, dzp;
    losses::simsiam_loss(y, yp, z, zp, &dy, &dyp, &dz, &dzp);
    const auto fd_y = oracles::finite_diff(
        [&](const EmbeddingBatch& x) { return losses::simsiam_loss(x, yp, z, zp).scalar; }, y);
    const auto fd_yp = oracles::finite_diff(
        [&](const EmbeddingBatch& x) { return losses::simsiam_loss(y, x, z, zp).scalar; }, yp);
    CHECK(oracles::max_rel_error(dy, fd_y) < 1e-4);
    CHECK(oracles::max_rel_error(dyp, fd_yp) < 1e-4);
  }
  SUBCASE("vicreg") {
    losses::VicregParams params;
    EmbeddingBatch dz, dzp;
    losses::vicreg_loss(z, zp, params, &dz, &dzp);
    const auto fd_z = oracles::finite_diff(
        [&](const EmbeddingBatch& x) { return losses::vicreg_loss(x, zp, params).scalar; }, z);
    const auto fd_zp = oracles::finite_diff(
        [&](const EmbeddingBatch& x) { return losses::vicreg_loss(z, x, params).scalar; }, zp);
    CHECK(oracles::max_rel_error(dz, fd_z) < 1e-4);
    CHECK(oracles::max_rel_error(dzp, fd_zp) < 1e-4);
  }
  SUBCASE("prior_kl both directions") {
    for (bool symmetric : {false, true}) {
      EmbeddingBatch da, db;
      losses::prior_kl(z, zp, 1.3, symmetric, &da, &db);
      const auto fd_a = oracles::finite_diff(
          [&](const EmbeddingBatch& x) { return losses::prior_kl(x, zp, 1.3, symmetric).scalar; },
          z);
      const auto fd_b = oracles::finite_diff(
          [&](const EmbeddingBatch& x) { return losses::prior_kl(z, x, 1.3, symmetric).scalar; },
          zp);
      CHECK(oracles::max_rel_error(da, fd_a) < 1e-4);
      CHECK(oracles::max_rel_error(db, fd_b) < 1e-4);
    }
  }
}

TEST_CASE("total_loss arithmetic and breakdown consistency") {
  LossValue main{1.0, {{"ssl", 1.0, 1.0}}};
  LossValue prior{0.8, {{"ssl", 0.8, 1.0}}};
  LossValue pk{0.5, {{"pk", 0.5, 1.0}}};

  // 1.0 + 0.8 + 2.0 * 0.5
  const LossValue total = losses::total_loss(main, prior, pk, 2.0);
  CHECK(total.scalar == doctest::Approx(2.8).epsilon(1e-12));
  CHECK(total.scalar == doctest::Approx(total.breakdown_sum()).epsilon(1e-9));

  const LossValue no_lambda = losses::total_loss(main, prior, pk, 0.0);
  CHECK(no_lambda.scalar == doctest::Approx(1.8).epsilon(1e-12));

  LossValue zero_pk{0.0, {{"pk", 0.0, 1.0}}};
  CHECK(losses::total_loss(main, prior, zero_pk, 0.5).scalar ==
        doctest::Approx(losses::total_loss(main, prior, zero_pk, 7.0).scalar).epsilon(1e-12));

  CHECK_THROWS(losses::total_loss(main, prior, pk, -0.1));
}

TEST_SUITE_END();
