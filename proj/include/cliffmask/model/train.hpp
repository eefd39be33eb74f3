//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_MODEL_TRAIN_HPP
#define CLIFFMASK_MODEL_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "cliffmask/bench/metrics.hpp"
#include "cliffmask/bench/splits.hpp"
#include "cliffmask/core/csv.hpp"
#include "cliffmask/core/log.hpp"
#include "cliffmask/core/rng.hpp"
#include "cliffmask/core/strings.hpp"
#include "cliffmask/depict/png_io.hpp"
#include "cliffmask/depict/sample_gen.hpp"
#include "cliffmask/model/checkpoint.hpp"
#include "cliffmask/model/losses.hpp"
#include "cliffmask/model/optim.hpp"
#include "cliffmask/model/vit.hpp"

namespace cliffmask::model {

// Fixed channel statistics, the usual vision-transfer constants. On these
// white-dominated renders the (x-mean)/std map roughly quadruples the
// linework contrast, which plain SGD needs.
inline constexpr double kChannelMean[3] = {0.485, 0.456, 0.406};
inline constexpr double kChannelStd[3] = {0.229, 0.224, 0.225};

template <typename T>
inline std::vector<T> normalize_image(const depict::RasterImage& img) {
  std::vector<T> out(img.rgb.size());
  for (std::size_t i = 0; i < img.rgb.size(); ++i) {
    double unit = static_cast<double>(img.rgb[i]) / 255.0;
    out[i] = static_cast<T>((unit - kChannelMean[i % 3]) / kChannelStd[i % 3]);
  }
  return out;
}

template <typename T>
struct PretextSample {
  depict::MaskLevel task = depict::MaskLevel::kAtom;
  std::vector<T> pixels;     // 3*H*W normalized
  std::vector<int> omega;    // masked patch indices
  std::vector<int> labels;   // per-omega (atom/bond) or single (motif)
  std::string molecule_id;
};

template <typename T>
inline PretextSample<T> load_pretext_sample(const depict::ManifestEntry& e,
                                            const std::string& image_dir,
                                            int image_size) {
  depict::DecodedPng png = depict::png_read_file(
      (std::filesystem::path(image_dir) / e.image_path).string());
  if (png.width != image_size || png.height != image_size) {
    raise(Errc::kShapeMismatch,
          "image " + e.image_path + " does not match encoder size");
  }
  depict::RasterImage img(png.width, png.height);
  img.rgb = png.rgb;
  PretextSample<T> s;
  if (e.task == "ampp") {
    s.task = depict::MaskLevel::kAtom;
  } else if (e.task == "bmpp") {
    s.task = depict::MaskLevel::kBond;
  } else if (e.task == "mmpp") {
    s.task = depict::MaskLevel::kMotif;
  } else {
    raise(Errc::kIoError, "unknown task '" + e.task + "' in manifest");
  }
  s.pixels = normalize_image<T>(img);
  s.omega = e.omega;
  s.labels = e.labels;
  s.molecule_id = e.molecule_id;
  return s;
}

struct LossRecord {
  double total = 0.0;
  double ampp = 0.0, bmpp = 0.0, mmpp = 0.0;
  int n_ampp = 0, n_bmpp = 0, n_mmpp = 0;
};

namespace detail {

// CE gradient for one patch-task sample, pushed through head + encoder.
// `weight` folds the per-sample and per-batch averaging.
template <typename T>
inline double pretext_sample_pass(VitModel<T>& m, const PretextSample<T>& s,
                                  ForwardCache<T>& cache, double weight,
                                  bool with_grad) {
  m.forward(s.pixels, cache);
  int d = m.config().embed_dim;
  int s_len = m.config().seq_len();
  std::vector<T> dy;
  if (with_grad) dy.assign(static_cast<std::size_t>(s_len) * d, T(0));

  double loss = 0.0;
  if (s.task == depict::MaskLevel::kMotif) {
    if (s.labels.size() != 1) {
      raise(Errc::kLengthMismatch, "motif sample needs exactly one label");
    }
    std::vector<T> logits = m.head_logits(m.cls_feature(cache), m.motif_w(),
                                          m.motif_b(),
                                          m.head_widths().motif);
    std::vector<T> dlogits;
    loss = softmax_ce(logits, s.labels[0], with_grad ? &dlogits : nullptr);
    if (with_grad) {
      for (T& v : dlogits) v = static_cast<T>(v * weight);
      m.head_backward(m.cls_feature(cache), dlogits, m.motif_w(),
                      m.motif_b(), dy.data());
    }
  } else {
    bool atom = s.task == depict::MaskLevel::kAtom;
    int w_id = atom ? m.atom_w() : m.bond_w();
    int b_id = atom ? m.atom_b() : m.bond_b();
    int k = atom ? m.head_widths().atom : m.head_widths().bond;
    if (s.omega.empty()) raise(Errc::kEmptyOmega, "no masked patches");
    if (s.omega.size() != s.labels.size()) {
      raise(Errc::kLengthMismatch, "omega/label length mismatch");
    }
    double patch_weight = weight / static_cast<double>(s.omega.size());
    for (std::size_t i = 0; i < s.omega.size(); ++i) {
      int pi = s.omega[i];
      if (pi < 0 || pi >= m.config().num_patches()) {
        raise(Errc::kShapeMismatch, "patch index outside grid");
      }
      const T* feat = m.patch_feature(cache, pi);
      std::vector<T> logits = m.head_logits(feat, w_id, b_id, k);
      std::vector<T> dlogits;
      loss += softmax_ce(logits, s.labels[i],
                         with_grad ? &dlogits : nullptr);
      if (with_grad) {
        for (T& v : dlogits) v = static_cast<T>(v * patch_weight);
        m.head_backward(feat, dlogits, w_id, b_id,
                        dy.data() + static_cast<std::size_t>(1 + pi) * d);
      }
    }
    loss /= static_cast<double>(s.omega.size());
  }
  if (with_grad) m.backward(cache, dy);
  return loss;
}

}  // namespace detail

// Forward (and optionally backward) over one mixed-task batch. The loss is
// the unweighted sum of per-task means; absent tasks contribute zero.
template <typename T>
inline LossRecord total_loss(VitModel<T>& m,
                             const std::vector<const PretextSample<T>*>& batch,
                             bool with_grad) {
  LossRecord rec;
  for (const PretextSample<T>* s : batch) {
    switch (s->task) {
      case depict::MaskLevel::kAtom: rec.n_ampp++; break;
      case depict::MaskLevel::kBond: rec.n_bmpp++; break;
      case depict::MaskLevel::kMotif: rec.n_mmpp++; break;
    }
  }
  ForwardCache<T> cache;
  for (const PretextSample<T>* s : batch) {
    int n_task = s->task == depict::MaskLevel::kAtom   ? rec.n_ampp
                 : s->task == depict::MaskLevel::kBond ? rec.n_bmpp
                                                       : rec.n_mmpp;
    double w = 1.0 / static_cast<double>(n_task);
    double loss = detail::pretext_sample_pass(m, *s, cache, w, with_grad);
    switch (s->task) {
      case depict::MaskLevel::kAtom: rec.ampp += loss * w; break;
      case depict::MaskLevel::kBond: rec.bmpp += loss * w; break;
      case depict::MaskLevel::kMotif: rec.mmpp += loss * w; break;
    }
  }
  rec.total = rec.ampp + rec.bmpp + rec.mmpp;
  return rec;
}

// One optimizer step over a batch; a non-finite loss aborts before any
// parameter is touched.
template <typename T>
inline LossRecord backward_and_step(
    VitModel<T>& m, const std::vector<const PretextSample<T>*>& batch,
    const OptimizerConfig& opt) {
  m.params().zero_grad();
  LossRecord rec = total_loss(m, batch, /*with_grad=*/true);
  if (!std::isfinite(rec.total)) {
    raise(Errc::kNonFiniteLoss, "non-finite loss, step aborted");
  }
  sgd_step(m.params(), opt);
  return rec;
}

struct TaskScores {
  double loss_ampp = 0.0, loss_bmpp = 0.0, loss_mmpp = 0.0;
  double acc_ampp = 0.0, acc_bmpp = 0.0, acc_mmpp = 0.0;
  int n_ampp = 0, n_bmpp = 0, n_mmpp = 0;

  double total_loss() const { return loss_ampp + loss_bmpp + loss_mmpp; }
  double mean_accuracy() const {
    double acc = 0.0;
    int present = 0;
    if (n_ampp) { acc += acc_ampp; ++present; }
    if (n_bmpp) { acc += acc_bmpp; ++present; }
    if (n_mmpp) { acc += acc_mmpp; ++present; }
    return present ? acc / present : 0.0;
  }
};

namespace detail {

template <typename T>
inline int argmax(const std::vector<T>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) {
      best = i;
    }
  }
  return best;
}

}  // namespace detail

// Per-task mean loss plus accuracy: patch-level for atom/bond tasks,
// sample-level for the motif task.
template <typename T>
inline TaskScores evaluate_pretext(VitModel<T>& m,
                                   const std::vector<PretextSample<T>>& samples,
                                   const std::vector<int>& indices) {
  TaskScores ts;
  long long ok_a = 0, tot_a = 0, ok_b = 0, tot_b = 0, ok_m = 0;
  ForwardCache<T> cache;
  for (int idx : indices) {
    const PretextSample<T>& s = samples[static_cast<std::size_t>(idx)];
    m.forward(s.pixels, cache);
    if (s.task == depict::MaskLevel::kMotif) {
      std::vector<T> logits = m.head_logits(
          m.cls_feature(cache), m.motif_w(), m.motif_b(),
          m.head_widths().motif);
      ts.loss_mmpp += softmax_ce(logits, s.labels[0]);
      ok_m += detail::argmax(logits) == s.labels[0] ? 1 : 0;
      ts.n_mmpp++;
      continue;
    }
    bool atom = s.task == depict::MaskLevel::kAtom;
    int w_id = atom ? m.atom_w() : m.bond_w();
    int b_id = atom ? m.atom_b() : m.bond_b();
    int k = atom ? m.head_widths().atom : m.head_widths().bond;
    double loss = 0.0;
    long long ok = 0;
    for (std::size_t i = 0; i < s.omega.size(); ++i) {
      std::vector<T> logits =
          m.head_logits(m.patch_feature(cache, s.omega[i]), w_id, b_id, k);
      loss += softmax_ce(logits, s.labels[i]);
      ok += detail::argmax(logits) == s.labels[i] ? 1 : 0;
    }
    if (atom) {
      ts.loss_ampp += loss / static_cast<double>(s.omega.size());
      ok_a += ok;
      tot_a += static_cast<long long>(s.omega.size());
      ts.n_ampp++;
    } else {
      ts.loss_bmpp += loss / static_cast<double>(s.omega.size());
      ok_b += ok;
      tot_b += static_cast<long long>(s.omega.size());
      ts.n_bmpp++;
    }
  }
  if (ts.n_ampp) {
    ts.loss_ampp /= ts.n_ampp;
    ts.acc_ampp = static_cast<double>(ok_a) / static_cast<double>(tot_a);
  }
  if (ts.n_bmpp) {
    ts.loss_bmpp /= ts.n_bmpp;
    ts.acc_bmpp = static_cast<double>(ok_b) / static_cast<double>(tot_b);
  }
  if (ts.n_mmpp) {
    ts.loss_mmpp /= ts.n_mmpp;
    ts.acc_mmpp = static_cast<double>(ok_m) / static_cast<double>(ts.n_mmpp);
  }
  return ts;
}

struct TrainLogRow {
  int epoch = 0;
  std::string split;  // train / val
  std::string task;   // ampp / bmpp / mmpp / total / mse / rmse
  double loss = 0.0;
  double accuracy = -1.0;  // negative = not applicable
};

inline void write_train_log_csv(const std::string& path,
                                const std::vector<TrainLogRow>& rows) {
  CsvTable t;
  t.header = {"epoch", "split", "task", "loss", "accuracy"};
  for (const TrainLogRow& r : rows) {
    t.rows.push_back({std::to_string(r.epoch), r.split, r.task,
                      fmt_double(r.loss),
                      r.accuracy < 0.0 ? "" : fmt_double(r.accuracy)});
  }
  write_csv(path, t);
}

struct PretrainResult {
  int best_epoch = -1;
  double best_score = -1.0;
  TaskScores best_val;
  std::vector<TrainLogRow> log;
};

// Seeded 95/5 manifest split, mixed-task batches, best-validation-accuracy
// checkpointing. Deterministic for a fixed (samples, config, seed).
template <typename T>
inline PretrainResult pretrain(VitModel<T>& m,
                               const std::vector<PretextSample<T>>& samples,
                               const OptimizerConfig& opt, int epochs,
                               std::uint64_t seed,
                               double val_fraction = 0.05) {
  opt.validate();
  if (samples.size() < 2) {
    raise(Errc::kEmptyInput, "pretraining needs at least two samples");
  }
  std::vector<int> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = static_cast<int>(i);
  }
  Rng split_rng = Rng::derive(seed, 1);
  split_rng.shuffle(order);
  int n_val = static_cast<int>(std::floor(
      val_fraction * static_cast<double>(samples.size()) + 0.5));
  n_val = std::clamp(n_val, 1, static_cast<int>(samples.size()) - 1);
  std::vector<int> val_idx(order.begin(), order.begin() + n_val);
  std::vector<int> train_idx(order.begin() + n_val, order.end());

  PretrainResult res;
  std::vector<T> best_params = m.params().flat_data();
  auto eval_and_log = [&](int epoch) {
    TaskScores val = evaluate_pretext(m, samples, val_idx);
    if (val.n_ampp) {
      res.log.push_back({epoch, "val", "ampp", val.loss_ampp, val.acc_ampp});
    }
    if (val.n_bmpp) {
      res.log.push_back({epoch, "val", "bmpp", val.loss_bmpp, val.acc_bmpp});
    }
    if (val.n_mmpp) {
      res.log.push_back({epoch, "val", "mmpp", val.loss_mmpp, val.acc_mmpp});
    }
    res.log.push_back(
        {epoch, "val", "total", val.total_loss(), val.mean_accuracy()});
    if (val.mean_accuracy() > res.best_score) {
      res.best_score = val.mean_accuracy();
      res.best_epoch = epoch;
      res.best_val = val;
      best_params = m.params().flat_data();
    }
    return val;
  };

  if (epochs <= 0) {
    eval_and_log(0);
    return res;
  }

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    Rng epoch_rng = Rng::derive(seed, 2, static_cast<std::uint64_t>(epoch));
    epoch_rng.shuffle(train_idx);
    double sum_a = 0.0, sum_b = 0.0, sum_m = 0.0;
    int cnt_a = 0, cnt_b = 0, cnt_m = 0;
    for (std::size_t at = 0; at < train_idx.size();
         at += static_cast<std::size_t>(opt.batch_size)) {
      std::size_t end = std::min(
          at + static_cast<std::size_t>(opt.batch_size), train_idx.size());
      std::vector<const PretextSample<T>*> batch;
      for (std::size_t i = at; i < end; ++i) {
        batch.push_back(&samples[static_cast<std::size_t>(train_idx[i])]);
      }
      LossRecord rec = backward_and_step(m, batch, opt);
      sum_a += rec.ampp * rec.n_ampp;
      sum_b += rec.bmpp * rec.n_bmpp;
      sum_m += rec.mmpp * rec.n_mmpp;
      cnt_a += rec.n_ampp;
      cnt_b += rec.n_bmpp;
      cnt_m += rec.n_mmpp;
    }
    double ea = cnt_a ? sum_a / cnt_a : 0.0;
    double eb = cnt_b ? sum_b / cnt_b : 0.0;
    double em = cnt_m ? sum_m / cnt_m : 0.0;
    if (cnt_a) res.log.push_back({epoch, "train", "ampp", ea, -1.0});
    if (cnt_b) res.log.push_back({epoch, "train", "bmpp", eb, -1.0});
    if (cnt_m) res.log.push_back({epoch, "train", "mmpp", em, -1.0});
    res.log.push_back({epoch, "train", "total", ea + eb + em, -1.0});
    TaskScores val = eval_and_log(epoch);
    log_info("epoch " + std::to_string(epoch) + " train " +
             fmt_fixed(ea + eb + em, 4) + " val_acc " +
             fmt_fixed(val.mean_accuracy(), 4));
  }
  m.params().flat_data() = best_params;
  return res;
}

template <typename T>
struct RegressionSample {
  std::string id;
  std::vector<T> pixels;
  double pk = 0.0;
};

struct FinetuneOptions {
  int max_epochs = 200;
  int patience = 10;
};

struct FinetuneResult {
  int best_epoch = 0;
  double best_val_rmse = std::numeric_limits<double>::infinity();
  std::vector<double> test_pred, test_truth;
  std::vector<TrainLogRow> log;
};

namespace detail {

template <typename T>
inline std::vector<double> predict_many(
    VitModel<T>& m, const std::vector<RegressionSample<T>>& samples,
    const std::vector<int>& indices) {
  std::vector<double> out;
  out.reserve(indices.size());
  ForwardCache<T> cache;
  for (int i : indices) {
    m.forward(samples[static_cast<std::size_t>(i)].pixels, cache);
    out.push_back(static_cast<double>(m.predict(cache)));
  }
  return out;
}

template <typename T>
inline double eval_rmse(VitModel<T>& m,
                        const std::vector<RegressionSample<T>>& samples,
                        const std::vector<int>& indices) {
  std::vector<double> pred = predict_many(m, samples, indices);
  std::vector<double> truth;
  truth.reserve(indices.size());
  for (int i : indices) {
    truth.push_back(samples[static_cast<std::size_t>(i)].pk);
  }
  return bench::rmse(pred, truth);
}

}  // namespace detail

// MSE fine-tuning of the full model (encoder + regression head) with early
// stopping on validation RMSE; falls back to train RMSE when the split has
// no validation partition. Restores the best epoch's weights at the end.
template <typename T>
inline FinetuneResult finetune(VitModel<T>& m,
                               const std::vector<RegressionSample<T>>& samples,
                               const bench::DatasetSplit& split,
                               const OptimizerConfig& opt,
                               const FinetuneOptions& fo, std::uint64_t seed) {
  opt.validate();
  if (!m.head_widths().regression) {
    raise(Errc::kConfigInvalid, "finetune needs a regression head");
  }
  if (split.train.empty()) raise(Errc::kEmptyInput, "empty train partition");
  const std::vector<int>& monitor =
      split.validation.empty() ? split.train : split.validation;

  FinetuneResult res;
  std::vector<T> best_params = m.params().flat_data();
  res.best_val_rmse = detail::eval_rmse(m, samples, monitor);
  res.log.push_back({0, "val", "rmse", res.best_val_rmse, -1.0});

  std::vector<int> train_idx = split.train;
  ForwardCache<T> cache;
  int since_best = 0;
  for (int epoch = 1; epoch <= fo.max_epochs; ++epoch) {
    Rng epoch_rng = Rng::derive(seed, 3, static_cast<std::uint64_t>(epoch));
    epoch_rng.shuffle(train_idx);
    double epoch_loss = 0.0;
    for (std::size_t at = 0; at < train_idx.size();
         at += static_cast<std::size_t>(opt.batch_size)) {
      std::size_t end = std::min(
          at + static_cast<std::size_t>(opt.batch_size), train_idx.size());
      m.params().zero_grad();
      double batch_loss = 0.0;
      double inv_n = 1.0 / static_cast<double>(end - at);
      for (std::size_t i = at; i < end; ++i) {
        const RegressionSample<T>& s =
            samples[static_cast<std::size_t>(train_idx[i])];
        m.forward(s.pixels, cache);
        double pred = static_cast<double>(m.predict(cache));
        double err = pred - s.pk;
        batch_loss += err * err * inv_n;
        std::vector<T> dlogits = {static_cast<T>(2.0 * err * inv_n)};
        std::vector<T> dy(static_cast<std::size_t>(m.config().seq_len()) *
                              m.config().embed_dim,
                          T(0));
        m.head_backward(m.cls_feature(cache), dlogits, m.reg_w(), m.reg_b(),
                        dy.data());
        m.backward(cache, dy);
      }
      if (!std::isfinite(batch_loss)) {
        raise(Errc::kNonFiniteLoss, "non-finite loss, step aborted");
      }
      sgd_step(m.params(), opt);
      epoch_loss += batch_loss * static_cast<double>(end - at);
    }
    epoch_loss /= static_cast<double>(train_idx.size());
    res.log.push_back({epoch, "train", "mse", epoch_loss, -1.0});

    double val_rmse = detail::eval_rmse(m, samples, monitor);
    res.log.push_back({epoch, "val", "rmse", val_rmse, -1.0});
    if (val_rmse < res.best_val_rmse) {
      res.best_val_rmse = val_rmse;
      res.best_epoch = epoch;
      best_params = m.params().flat_data();
      since_best = 0;
    } else if (++since_best >= fo.patience) {
      log_info("early stop at epoch " + std::to_string(epoch));
      break;
    }
  }
  m.params().flat_data() = best_params;

  if (!split.test.empty()) {
    res.test_pred = detail::predict_many(m, samples, split.test);
    for (int i : split.test) {
      res.test_truth.push_back(samples[static_cast<std::size_t>(i)].pk);
    }
  }
  return res;
}

}  // namespace cliffmask::model

#endif  // CLIFFMASK_MODEL_TRAIN_HPP
