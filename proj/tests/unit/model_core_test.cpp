//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "../support/catch.hpp"
#include "cliffmask/core/rng.hpp"
#include "cliffmask/model/checkpoint.hpp"
#include "cliffmask/model/losses.hpp"
#include "cliffmask/model/optim.hpp"
#include "cliffmask/model/train.hpp"

using Catch::Approx;
using cliffmask::Errc;
using cliffmask::Rng;
using cliffmask::testing::expect_error;
namespace model = cliffmask::model;
namespace depict = cliffmask::depict;
namespace fs = std::filesystem;

namespace {

model::EncoderConfig tiny_config(std::uint64_t seed = 1) {
  model::EncoderConfig cfg;
  cfg.image_size = 16;
  cfg.patch_size = 8;
  cfg.embed_dim = 8;
  cfg.depth = 2;
  cfg.heads = 2;
  cfg.mlp_ratio = 2;
  cfg.seed = seed;
  return cfg;
}

template <typename T>
std::vector<T> random_pixels(int image_size, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<T> px(static_cast<std::size_t>(3 * image_size * image_size));
  for (T& v : px) v = static_cast<T>(rng.unit());
  return px;
}

template <typename T>
model::PretextSample<T> make_sample(depict::MaskLevel task,
                                    std::vector<int> omega,
                                    std::vector<int> labels,
                                    int image_size, std::uint64_t seed) {
  model::PretextSample<T> s;
  s.task = task;
  s.pixels = random_pixels<T>(image_size, seed);
  s.omega = std::move(omega);
  s.labels = std::move(labels);
  return s;
}

}  // namespace

TEST_CASE("encoder config invariants", "[model]") {
  model::EncoderConfig bad = tiny_config();
  bad.patch_size = 7;  // does not divide 16
  expect_error([&] { bad.validate(); }, Errc::kConfigInvalid);
  bad = tiny_config();
  bad.embed_dim = 9;  // not divisible by heads
  expect_error([&] { bad.validate(); }, Errc::kConfigInvalid);
  CHECK(tiny_config().seq_len() == 5);  // 1 + (16/8)^2
}

TEST_CASE("forward shape law and determinism", "[model]") {
  model::VitModel<float> m(tiny_config(), model::HeadWidths{3, 4, 5, false});
  std::vector<float> px = random_pixels<float>(16, 7);
  model::ForwardCache<float> c1, c2;
  const std::vector<float>& y1 = m.forward(px, c1);
  REQUIRE(y1.size() ==
          static_cast<std::size_t>(m.config().seq_len() * 8));
  const std::vector<float>& y2 = m.forward(px, c2);
  CHECK(y1 == y2);  // bit-identical inference

  expect_error([&] {
    std::vector<float> bad(10, 0.0f);
    model::ForwardCache<float> c;
    m.forward(bad, c);
  }, Errc::kShapeMismatch);
}

TEST_CASE("zeroed weights give uniform logits", "[model]") {
  model::VitModel<double> m(tiny_config(), model::HeadWidths{10, 4, 200,
                                                             false});
  std::fill(m.params().flat_data().begin(), m.params().flat_data().end(),
            0.0);
  std::vector<double> px = random_pixels<double>(16, 3);
  model::ForwardCache<double> cache;
  m.forward(px, cache);
  std::vector<double> logits =
      m.head_logits(m.cls_feature(cache), m.motif_w(), m.motif_b(), 200);
  for (double v : logits) CHECK(v == 0.0);

  // Uniform logits: CE is exactly ln k.
  CHECK(model::loss_ampp(m, cache, {0, 1}, {2, 7}) ==
        Approx(std::log(10.0)).margin(1e-12));
  CHECK(model::loss_bmpp(m, cache, {3}, {1}) ==
        Approx(std::log(4.0)).margin(1e-12));
  CHECK(model::loss_mmpp(m, cache, 42) ==
        Approx(std::log(200.0)).margin(1e-12));
  CHECK(std::log(200.0) == Approx(5.2983).margin(5e-5));
}

TEST_CASE("softmax cross-entropy hand fixture", "[model]") {
  // Naive formula recomputation, no max-shift: -(l[y] - ln sum exp(l)).
  std::vector<double> logits = {0.2, -0.1, 0.3};
  double denom = std::exp(0.2) + std::exp(-0.1) + std::exp(0.3);
  double want = -(0.2 - std::log(denom));
  std::vector<double> dlogits;
  double got = model::softmax_ce(logits, 0, &dlogits);
  CHECK(got == Approx(want).margin(1e-9));
  CHECK(dlogits[0] == Approx(std::exp(0.2) / denom - 1.0).margin(1e-12));
  CHECK(dlogits[1] == Approx(std::exp(-0.1) / denom).margin(1e-12));

  // Softmax rows sum to one; gradient rows sum to zero.
  CHECK(dlogits[0] + dlogits[1] + dlogits[2] == Approx(0.0).margin(1e-12));

  expect_error([&] { model::softmax_ce(logits, 3); },
               Errc::kLabelOutOfRange);
  expect_error([&] { model::softmax_ce(logits, -1); },
               Errc::kLabelOutOfRange);
}

TEST_CASE("per-sample patch CE averages over omega", "[model]") {
  model::VitModel<double> m(tiny_config(11), model::HeadWidths{3, 4, 5,
                                                               false});
  std::vector<double> px = random_pixels<double>(16, 5);
  model::ForwardCache<double> cache;
  m.forward(px, cache);

  // Two-patch three-class fixture vs direct per-patch arithmetic.
  double l0 = model::softmax_ce(
      m.head_logits(m.patch_feature(cache, 0), m.atom_w(), m.atom_b(), 3), 1);
  double l2 = model::softmax_ce(
      m.head_logits(m.patch_feature(cache, 2), m.atom_w(), m.atom_b(), 3), 0);
  CHECK(model::loss_ampp(m, cache, {0, 2}, {1, 0}) ==
        Approx(0.5 * (l0 + l2)).margin(1e-9));

  expect_error([&] { model::loss_ampp(m, cache, {}, {}); },
               Errc::kEmptyOmega);
  expect_error([&] { model::loss_ampp(m, cache, {0}, {3}); },
               Errc::kLabelOutOfRange);
  expect_error([&] { model::loss_mmpp(m, cache, 5); },
               Errc::kLabelOutOfRange);
}

TEST_CASE("analytic gradients match central finite differences", "[model]") {
  model::VitModel<double> m(tiny_config(42),
                            model::HeadWidths{3, 4, 5, false});
  std::vector<model::PretextSample<double>> samples;
  samples.push_back(make_sample<double>(depict::MaskLevel::kAtom, {0, 2},
                                        {1, 2}, 16, 100));
  samples.push_back(
      make_sample<double>(depict::MaskLevel::kBond, {1, 3}, {0, 3}, 16, 101));
  samples.push_back(
      make_sample<double>(depict::MaskLevel::kMotif, {0}, {4}, 16, 102));
  std::vector<const model::PretextSample<double>*> batch;
  for (const auto& s : samples) batch.push_back(&s);

  m.params().zero_grad();
  model::LossRecord rec = model::total_loss(m, batch, /*with_grad=*/true);
  REQUIRE(std::isfinite(rec.total));

  const double eps = 1e-4;
  std::vector<double>& data = m.params().flat_data();
  std::vector<double> analytic = m.params().flat_grad();
  double max_rel = 0.0;
  int checked = 0, failed = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double save = data[i];
    data[i] = save + eps;
    double up = model::total_loss(m, batch, false).total;
    data[i] = save - eps;
    double down = model::total_loss(m, batch, false).total;
    data[i] = save;
    double numeric = (up - down) / (2.0 * eps);
    double denom = std::max(std::abs(analytic[i]), std::abs(numeric));
    ++checked;
    if (denom < 1e-10) continue;  // both effectively zero
    double rel = std::abs(analytic[i] - numeric) / denom;
    max_rel = std::max(max_rel, rel);
    if (rel > 1e-3 && std::abs(analytic[i] - numeric) > 1e-9) ++failed;
  }
  INFO("checked " << checked << " params, max rel err " << max_rel);
  CHECK(failed == 0);
  CHECK(checked == static_cast<int>(data.size()));
}

TEST_CASE("regression head gradient matches finite differences", "[model]") {
  model::VitModel<double> m(tiny_config(43),
                            model::HeadWidths{0, 0, 0, true});
  std::vector<double> px = random_pixels<double>(16, 200);
  const double target = 5.0;

  auto loss_fn = [&]() {
    model::ForwardCache<double> cache;
    m.forward(px, cache);
    double err = m.predict(cache) - target;
    return err * err;
  };

  m.params().zero_grad();
  {
    model::ForwardCache<double> cache;
    m.forward(px, cache);
    double err = m.predict(cache) - target;
    std::vector<double> dlogits = {2.0 * err};
    std::vector<double> dy(
        static_cast<std::size_t>(m.config().seq_len() * 8), 0.0);
    m.head_backward(m.cls_feature(cache), dlogits, m.reg_w(), m.reg_b(),
                    dy.data());
    m.backward(cache, dy);
  }

  const double eps = 1e-4;
  std::vector<double>& data = m.params().flat_data();
  std::vector<double> analytic = m.params().flat_grad();
  int failed = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double save = data[i];
    data[i] = save + eps;
    double up = loss_fn();
    data[i] = save - eps;
    double down = loss_fn();
    data[i] = save;
    double numeric = (up - down) / (2.0 * eps);
    double denom = std::max(std::abs(analytic[i]), std::abs(numeric));
    if (denom < 1e-10) continue;
    double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > 1e-3 && std::abs(analytic[i] - numeric) > 1e-9) ++failed;
  }
  CHECK(failed == 0);
}

TEST_CASE("sgd momentum and decoupled weight decay arithmetic", "[model]") {
  model::ParamStore<double> store;
  int id = store.declare("w", {2});
  store.allocate();
  store.data(id)[0] = 1.0;
  store.data(id)[1] = 1.0;

  model::OptimizerConfig opt;
  opt.lr = 0.1;
  opt.momentum = 0.9;
  opt.weight_decay = 0.0;

  store.grad(id)[0] = 0.5;
  model::sgd_step(store, opt);
  CHECK(store.data(id)[0] == Approx(0.95).margin(1e-15));  // 1 - 0.1*0.5
  model::sgd_step(store, opt);  // momentum carries: m = 0.45 + 0.5
  CHECK(store.data(id)[0] == Approx(0.855).margin(1e-15));

  // Decay multiplies the weight directly and skips the momentum buffer.
  model::ParamStore<double> wstore;
  int wid = wstore.declare("w", {1});
  wstore.allocate();
  wstore.data(wid)[0] = 1.0;
  model::OptimizerConfig decay;
  decay.lr = 0.1;
  decay.momentum = 0.9;
  decay.weight_decay = 0.1;
  model::sgd_step(wstore, decay);
  CHECK(wstore.data(wid)[0] == Approx(0.99).margin(1e-15));
  CHECK(wstore.flat_momentum()[0] == 0.0);

  model::OptimizerConfig bad;
  bad.momentum = 1.0;
  expect_error([&] { bad.validate(); }, Errc::kConfigInvalid);
}

TEST_CASE("lr zero leaves parameters untouched", "[model]") {
  model::VitModel<float> m(tiny_config(3), model::HeadWidths{3, 4, 5, false});
  std::vector<float> before = m.params().flat_data();
  auto s = make_sample<float>(depict::MaskLevel::kAtom, {0}, {1}, 16, 9);
  model::OptimizerConfig opt;
  opt.lr = 0.0;
  model::backward_and_step(m, {&s}, opt);
  CHECK(m.params().flat_data() == before);
}

TEST_CASE("sgd descends a convex quadratic", "[model]") {
  // Least squares via the optimizer: loss = ||X w - y||^2 / n.
  model::ParamStore<double> store;
  int wid = store.declare("w", {3});
  store.allocate();
  Rng rng(77);
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 12; ++i) {
    std::vector<double> row = {rng.gaussian(), rng.gaussian(), 1.0};
    x.push_back(row);
    y.push_back(2.0 * row[0] - row[1] + 0.5);
  }
  auto loss_and_grad = [&](bool with_grad) {
    double* w = store.data(wid);
    double loss = 0.0;
    if (with_grad) store.zero_grad();
    for (std::size_t i = 0; i < x.size(); ++i) {
      double pred = 0.0;
      for (int k = 0; k < 3; ++k) pred += w[k] * x[i][static_cast<std::size_t>(k)];
      double err = pred - y[i];
      loss += err * err / static_cast<double>(x.size());
      if (with_grad) {
        for (int k = 0; k < 3; ++k) {
          store.grad(wid)[k] += 2.0 * err * x[i][static_cast<std::size_t>(k)] /
                                static_cast<double>(x.size());
        }
      }
    }
    return loss;
  };

  model::OptimizerConfig opt;
  opt.lr = 0.05;
  opt.momentum = 0.9;
  opt.weight_decay = 0.0;
  double prev = loss_and_grad(false);
  double first = prev;
  double last = prev;
  for (int step = 0; step < 100; ++step) {
    loss_and_grad(true);
    model::sgd_step(store, opt);
    last = loss_and_grad(false);
  }
  CHECK(last < first * 0.01);
  CHECK(last < 1e-3);
}

TEST_CASE("non-finite loss aborts the step", "[model]") {
  model::VitModel<double> m(tiny_config(4), model::HeadWidths{3, 4, 5, false});
  m.params().flat_data()[0] = std::numeric_limits<double>::infinity();
  std::vector<double> before = m.params().flat_data();
  auto s = make_sample<double>(depict::MaskLevel::kMotif, {0}, {1}, 16, 9);
  model::OptimizerConfig opt;
  expect_error([&] { model::backward_and_step(m, {&s}, opt); },
               Errc::kNonFiniteLoss);
  CHECK(m.params().flat_data() == before);  // nothing was updated
}

TEST_CASE("checkpoint round trip is exact and byte-stable", "[model]") {
  model::VitModel<double> m(tiny_config(21), model::HeadWidths{3, 4, 5,
                                                               false});
  fs::path p1 = fs::temp_directory_path() / "cliffmask_ckpt_a.bin";
  fs::path p2 = fs::temp_directory_path() / "cliffmask_ckpt_b.bin";
  model::save_checkpoint(m, p1.string());
  model::save_checkpoint(m, p2.string());

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  CHECK(slurp(p1) == slurp(p2));  // deterministic writer

  model::VitModel<double> r = model::load_checkpoint<double>(p1.string());
  CHECK(r.params().flat_data() == m.params().flat_data());
  CHECK(r.config().embed_dim == m.config().embed_dim);
  CHECK(r.head_widths().motif == 5);

  std::vector<double> px = random_pixels<double>(16, 5);
  model::ForwardCache<double> ca, cb;
  m.forward(px, ca);
  r.forward(px, cb);
  CHECK(ca.y == cb.y);

  // dtype guard
  expect_error([&] { model::load_checkpoint<float>(p1.string()); },
               Errc::kIoError);

  // truncation guard
  std::string bytes = slurp(p1);
  std::ofstream out(p2, std::ios::binary);
  out << bytes.substr(0, bytes.size() / 2);
  out.close();
  expect_error([&] { model::load_checkpoint<double>(p2.string()); },
               Errc::kIoError);
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("warm start copies the encoder trunk only", "[model]") {
  model::VitModel<double> pre(tiny_config(31),
                              model::HeadWidths{3, 4, 5, false});
  fs::path p = fs::temp_directory_path() / "cliffmask_ckpt_pre.bin";
  model::save_checkpoint(pre, p.string());

  model::VitModel<double> ft(tiny_config(99),
                             model::HeadWidths{0, 0, 0, true});
  int copied = model::warm_start(ft, p.string());
  CHECK(copied > 0);

  int src_id = pre.params().find("block0.qkv.w");
  int dst_id = ft.params().find("block0.qkv.w");
  REQUIRE(src_id >= 0);
  REQUIRE(dst_id >= 0);
  const auto& e = pre.params().entry(src_id);
  for (std::size_t i = 0; i < e.size; ++i) {
    REQUIRE(ft.params().data(dst_id)[i] == pre.params().data(src_id)[i]);
  }

  // Mismatched encoder geometry must refuse.
  model::EncoderConfig other = tiny_config(31);
  other.embed_dim = 16;
  other.heads = 2;
  model::VitModel<double> wrong(other, model::HeadWidths{0, 0, 0, true});
  expect_error([&] { model::warm_start(wrong, p.string()); },
               Errc::kShapeMismatch);
  fs::remove(p);
}
