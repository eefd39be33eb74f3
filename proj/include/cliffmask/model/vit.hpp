//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_MODEL_VIT_HPP
#define CLIFFMASK_MODEL_VIT_HPP

#include <cmath>
#include <string>
#include <vector>

#include "cliffmask/core/error.hpp"
#include "cliffmask/core/rng.hpp"
#include "cliffmask/model/params.hpp"

namespace cliffmask::model {

struct EncoderConfig {
  int image_size = 224;
  int patch_size = 16;
  int embed_dim = 192;
  int depth = 4;
  int heads = 3;
  int mlp_ratio = 4;
  std::uint64_t seed = 0;

  int patches_per_side() const { return image_size / patch_size; }
  int num_patches() const { return patches_per_side() * patches_per_side(); }
  int seq_len() const { return 1 + num_patches(); }
  int patch_dim() const { return 3 * patch_size * patch_size; }

  void validate() const {
    if (image_size <= 0 || patch_size <= 0 || embed_dim <= 0 || depth <= 0 ||
        heads <= 0 || mlp_ratio <= 0) {
      raise(Errc::kConfigInvalid, "encoder dimensions must be positive");
    }
    if (image_size % patch_size != 0) {
      raise(Errc::kConfigInvalid, "patch size must divide image size");
    }
    if (embed_dim % heads != 0) {
      raise(Errc::kConfigInvalid, "embed dim must be divisible by heads");
    }
  }
};

// Output widths of the task heads; zero means the head is absent.
struct HeadWidths {
  int atom = 0;
  int bond = 0;
  int motif = 0;
  bool regression = false;
};

template <typename T>
struct BlockCache {
  std::vector<T> t_in;            // S x D block input
  std::vector<T> a_norm;          // S x D after LN1
  std::vector<T> ln1_mean, ln1_rstd;
  std::vector<T> qkv;             // S x 3D
  std::vector<T> attn;            // heads x S x S softmax rows
  std::vector<T> attn_out;        // S x D concatenated head outputs
  std::vector<T> t_mid;           // S x D after the attention residual
  std::vector<T> b_norm;          // S x D after LN2
  std::vector<T> ln2_mean, ln2_rstd;
  std::vector<T> f1;              // S x M before GELU
  std::vector<T> g;               // S x M after GELU
};

template <typename T>
struct ForwardCache {
  std::vector<T> patches;         // n_p x patch_dim raw patch rows
  std::vector<T> t0;              // S x D embedded tokens
  std::vector<BlockCache<T>> blocks;
  std::vector<T> t_final;         // S x D input of the final LN
  std::vector<T> lnf_mean, lnf_rstd;
  std::vector<T> y;               // S x D final features
};

namespace detail {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLnEps = 1e-5;

template <typename T>
inline T gelu(T x) {
  return static_cast<T>(0.5 * static_cast<double>(x) *
                        (1.0 + std::erf(static_cast<double>(x) * kInvSqrt2)));
}

template <typename T>
inline T gelu_grad(T x) {
  double xd = static_cast<double>(x);
  double cdf = 0.5 * (1.0 + std::erf(xd * kInvSqrt2));
  double pdf = std::exp(-0.5 * xd * xd) * kInvSqrt2Pi;
  return static_cast<T>(cdf + xd * pdf);
}

// y = g * (x - mean) * rstd + b per row; caches the statistics.
template <typename T>
inline void layer_norm_forward(const T* x, int rows, int dim, const T* g,
                               const T* b, T* y, T* means, T* rstds) {
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + r * dim;
    T* yr = y + r * dim;
    double mean = 0.0;
    for (int d = 0; d < dim; ++d) mean += static_cast<double>(xr[d]);
    mean /= dim;
    double var = 0.0;
    for (int d = 0; d < dim; ++d) {
      double c = static_cast<double>(xr[d]) - mean;
      var += c * c;
    }
    var /= dim;
    double rstd = 1.0 / std::sqrt(var + kLnEps);
    means[r] = static_cast<T>(mean);
    rstds[r] = static_cast<T>(rstd);
    for (int d = 0; d < dim; ++d) {
      double xhat = (static_cast<double>(xr[d]) - mean) * rstd;
      yr[d] = static_cast<T>(static_cast<double>(g[d]) * xhat +
                             static_cast<double>(b[d]));
    }
  }
}

template <typename T>
inline void layer_norm_backward(const T* x, const T* dy, int rows, int dim,
                                const T* g, const T* means, const T* rstds,
                                T* dx, T* dg, T* db) {
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + r * dim;
    const T* dyr = dy + r * dim;
    T* dxr = dx + r * dim;
    double mean = static_cast<double>(means[r]);
    double rstd = static_cast<double>(rstds[r]);
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (int d = 0; d < dim; ++d) {
      double xhat = (static_cast<double>(xr[d]) - mean) * rstd;
      double dxhat = static_cast<double>(dyr[d]) * static_cast<double>(g[d]);
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat;
      dg[d] += static_cast<T>(static_cast<double>(dyr[d]) * xhat);
      db[d] += dyr[d];
    }
    double inv_dim = 1.0 / dim;
    for (int d = 0; d < dim; ++d) {
      double xhat = (static_cast<double>(xr[d]) - mean) * rstd;
      double dxhat = static_cast<double>(dyr[d]) * static_cast<double>(g[d]);
      dxr[d] = static_cast<T>(
          rstd * (dxhat - sum_dxhat * inv_dim - xhat * sum_dxhat_xhat *
                                                    inv_dim));
    }
  }
}

}  // namespace detail

// Pre-LN vision transformer with task heads, hand-written reverse mode.
// All parameters live in one ParamStore so training, checkpointing and
// gradient checking share a single flat view.
template <typename T>
class VitModel {
 public:
  struct BlockIds {
    int ln1_g, ln1_b, qkv_w, qkv_b, proj_w, proj_b;
    int ln2_g, ln2_b, fc1_w, fc1_b, fc2_w, fc2_b;
  };

  VitModel(const EncoderConfig& cfg, const HeadWidths& heads)
      : cfg_(cfg), heads_(heads) {
    cfg_.validate();
    int d = cfg_.embed_dim;
    int pd = cfg_.patch_dim();
    int m = d * cfg_.mlp_ratio;
    patch_w_ = params_.declare("patch_embed.w", {d, pd});
    patch_b_ = params_.declare("patch_embed.b", {d});
    cls_tok_ = params_.declare("cls_token", {d});
    pos_emb_ = params_.declare("pos_embed", {cfg_.seq_len(), d});
    for (int b = 0; b < cfg_.depth; ++b) {
      std::string p = "block" + std::to_string(b) + ".";
      BlockIds ids;
      ids.ln1_g = params_.declare(p + "ln1.g", {d});
      ids.ln1_b = params_.declare(p + "ln1.b", {d});
      ids.qkv_w = params_.declare(p + "qkv.w", {3 * d, d});
      ids.qkv_b = params_.declare(p + "qkv.b", {3 * d});
      ids.proj_w = params_.declare(p + "proj.w", {d, d});
      ids.proj_b = params_.declare(p + "proj.b", {d});
      ids.ln2_g = params_.declare(p + "ln2.g", {d});
      ids.ln2_b = params_.declare(p + "ln2.b", {d});
      ids.fc1_w = params_.declare(p + "fc1.w", {m, d});
      ids.fc1_b = params_.declare(p + "fc1.b", {m});
      ids.fc2_w = params_.declare(p + "fc2.w", {d, m});
      ids.fc2_b = params_.declare(p + "fc2.b", {d});
      blocks_.push_back(ids);
    }
    lnf_g_ = params_.declare("final_ln.g", {d});
    lnf_b_ = params_.declare("final_ln.b", {d});
    if (heads_.atom > 0) {
      atom_w_ = params_.declare("head.atom.w", {heads_.atom, d});
      atom_b_ = params_.declare("head.atom.b", {heads_.atom});
    }
    if (heads_.bond > 0) {
      bond_w_ = params_.declare("head.bond.w", {heads_.bond, d});
      bond_b_ = params_.declare("head.bond.b", {heads_.bond});
    }
    if (heads_.motif > 0) {
      motif_w_ = params_.declare("head.motif.w", {heads_.motif, d});
      motif_b_ = params_.declare("head.motif.b", {heads_.motif});
    }
    if (heads_.regression) {
      reg_w_ = params_.declare("head.reg.w", {1, d});
      reg_b_ = params_.declare("head.reg.b", {1});
    }
    params_.allocate();
    init_weights();
  }

  const EncoderConfig& config() const { return cfg_; }
  const HeadWidths& head_widths() const { return heads_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }

  // ---- forward ----------------------------------------------------------

  const std::vector<T>& forward(const std::vector<T>& pixels,
                                ForwardCache<T>& cache) const {
    int hw = cfg_.image_size;
    if (static_cast<int>(pixels.size()) != 3 * hw * hw) {
      raise(Errc::kShapeMismatch, "image does not match encoder config");
    }
    int s = cfg_.seq_len();
    int d = cfg_.embed_dim;
    int np = cfg_.num_patches();
    int pd = cfg_.patch_dim();
    int pps = cfg_.patches_per_side();
    int p = cfg_.patch_size;

    cache.patches.assign(static_cast<std::size_t>(np) * pd, T(0));
    for (int pi = 0; pi < np; ++pi) {
      int py = pi / pps, px = pi % pps;
      T* row = cache.patches.data() + static_cast<std::size_t>(pi) * pd;
      int k = 0;
      for (int dy = 0; dy < p; ++dy) {
        for (int dx = 0; dx < p; ++dx) {
          std::size_t at = (static_cast<std::size_t>(py * p + dy) * hw +
                            static_cast<std::size_t>(px * p + dx)) *
                           3;
          row[k++] = pixels[at];
          row[k++] = pixels[at + 1];
          row[k++] = pixels[at + 2];
        }
      }
    }

    cache.t0.assign(static_cast<std::size_t>(s) * d, T(0));
    const T* wp = params_.data(patch_w_);
    const T* bp = params_.data(patch_b_);
    const T* cls = params_.data(cls_tok_);
    const T* pos = params_.data(pos_emb_);
    for (int dd = 0; dd < d; ++dd) cache.t0[dd] = cls[dd];
    for (int pi = 0; pi < np; ++pi) {
      const T* x = cache.patches.data() + static_cast<std::size_t>(pi) * pd;
      T* tok = cache.t0.data() + static_cast<std::size_t>(1 + pi) * d;
      for (int dd = 0; dd < d; ++dd) {
        const T* wrow = wp + static_cast<std::size_t>(dd) * pd;
        T acc = bp[dd];
        for (int k = 0; k < pd; ++k) acc += wrow[k] * x[k];
        tok[dd] = acc;
      }
    }
    for (int t = 0; t < s; ++t) {
      for (int dd = 0; dd < d; ++dd) {
        cache.t0[static_cast<std::size_t>(t) * d + dd] +=
            pos[static_cast<std::size_t>(t) * d + dd];
      }
    }

    cache.blocks.assign(static_cast<std::size_t>(cfg_.depth),
                        BlockCache<T>{});
    std::vector<T> cur = cache.t0;
    for (int b = 0; b < cfg_.depth; ++b) {
      cur = block_forward(cur, blocks_[static_cast<std::size_t>(b)],
                          cache.blocks[static_cast<std::size_t>(b)]);
    }
    cache.t_final = cur;
    cache.lnf_mean.assign(static_cast<std::size_t>(s), T(0));
    cache.lnf_rstd.assign(static_cast<std::size_t>(s), T(0));
    cache.y.assign(static_cast<std::size_t>(s) * d, T(0));
    detail::layer_norm_forward(cache.t_final.data(), s, d,
                               params_.data(lnf_g_), params_.data(lnf_b_),
                               cache.y.data(), cache.lnf_mean.data(),
                               cache.lnf_rstd.data());
    return cache.y;
  }

  const T* cls_feature(const ForwardCache<T>& cache) const {
    return cache.y.data();
  }
  const T* patch_feature(const ForwardCache<T>& cache, int pi) const {
    return cache.y.data() + static_cast<std::size_t>(1 + pi) * cfg_.embed_dim;
  }

  std::vector<T> head_logits(const T* feat, int w_id, int b_id,
                             int k) const {
    const T* w = params_.data(w_id);
    const T* b = params_.data(b_id);
    int d = cfg_.embed_dim;
    std::vector<T> out(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
      const T* wrow = w + static_cast<std::size_t>(c) * d;
      T acc = b[c];
      for (int dd = 0; dd < d; ++dd) acc += wrow[dd] * feat[dd];
      out[static_cast<std::size_t>(c)] = acc;
    }
    return out;
  }

  // Regression prediction from the cls feature.
  T predict(const ForwardCache<T>& cache) const {
    if (!heads_.regression) {
      raise(Errc::kConfigInvalid, "model has no regression head");
    }
    return head_logits(cls_feature(cache), reg_w_, reg_b_, 1)[0];
  }

  // ---- backward ---------------------------------------------------------

  // Accumulates parameter gradients for one sample given d loss / d y.
  void backward(const ForwardCache<T>& cache, std::vector<T>& dy) {
    int s = cfg_.seq_len();
    int d = cfg_.embed_dim;
    int np = cfg_.num_patches();
    int pd = cfg_.patch_dim();

    std::vector<T> dt(static_cast<std::size_t>(s) * d, T(0));
    detail::layer_norm_backward(cache.t_final.data(), dy.data(), s, d,
                                params_.data(lnf_g_), cache.lnf_mean.data(),
                                cache.lnf_rstd.data(), dt.data(),
                                params_.grad(lnf_g_), params_.grad(lnf_b_));

    for (int b = cfg_.depth - 1; b >= 0; --b) {
      dt = block_backward(dt, blocks_[static_cast<std::size_t>(b)],
                          cache.blocks[static_cast<std::size_t>(b)]);
    }

    T* dpos = params_.grad(pos_emb_);
    T* dcls = params_.grad(cls_tok_);
    T* dwp = params_.grad(patch_w_);
    T* dbp = params_.grad(patch_b_);
    for (int t = 0; t < s; ++t) {
      for (int dd = 0; dd < d; ++dd) {
        dpos[static_cast<std::size_t>(t) * d + dd] +=
            dt[static_cast<std::size_t>(t) * d + dd];
      }
    }
    for (int dd = 0; dd < d; ++dd) dcls[dd] += dt[dd];
    for (int pi = 0; pi < np; ++pi) {
      const T* x = cache.patches.data() + static_cast<std::size_t>(pi) * pd;
      const T* dtok = dt.data() + static_cast<std::size_t>(1 + pi) * d;
      for (int dd = 0; dd < d; ++dd) {
        T g = dtok[dd];
        if (g == T(0)) continue;
        T* wrow = dwp + static_cast<std::size_t>(dd) * pd;
        for (int k = 0; k < pd; ++k) wrow[k] += g * x[k];
        dbp[dd] += g;
      }
    }
  }

  // Gradient of a linear head, accumulating d loss / d feature into dfeat.
  void head_backward(const T* feat, const std::vector<T>& dlogits, int w_id,
                     int b_id, T* dfeat) {
    int k = static_cast<int>(dlogits.size());
    int d = cfg_.embed_dim;
    const T* w = params_.data(w_id);
    T* dw = params_.grad(w_id);
    T* db = params_.grad(b_id);
    for (int c = 0; c < k; ++c) {
      T g = dlogits[static_cast<std::size_t>(c)];
      if (g == T(0)) continue;
      const T* wrow = w + static_cast<std::size_t>(c) * d;
      T* dwrow = dw + static_cast<std::size_t>(c) * d;
      for (int dd = 0; dd < d; ++dd) {
        dwrow[dd] += g * feat[dd];
        dfeat[dd] += g * wrow[dd];
      }
      db[c] += g;
    }
  }

  int atom_w() const { return atom_w_; }
  int atom_b() const { return atom_b_; }
  int bond_w() const { return bond_w_; }
  int bond_b() const { return bond_b_; }
  int motif_w() const { return motif_w_; }
  int motif_b() const { return motif_b_; }
  int reg_w() const { return reg_w_; }
  int reg_b() const { return reg_b_; }

 private:
  // Glorot-scaled draws. Plain SGD is not scale-invariant the way adaptive
  // optimizers are: a flat small init starves the attention path and the
  // cls pooling never couples to the input.
  void init_xavier(int id, Rng& rng) {
    const auto& shape = params_.entry(id).shape;
    double fan_out = shape.empty() ? 1.0 : static_cast<double>(shape[0]);
    double fan_in = shape.size() > 1 ? static_cast<double>(shape[1]) : 1.0;
    params_.init_normal(id, rng, std::sqrt(2.0 / (fan_in + fan_out)));
  }

  void init_weights() {
    Rng rng(cfg_.seed);
    init_xavier(patch_w_, rng);
    params_.init_constant(patch_b_, T(0));
    // Zero cls start: the token's stream is then carried by attended
    // content rather than its own learned constant.
    params_.init_constant(cls_tok_, T(0));
    params_.init_normal(pos_emb_, rng, 0.02);
    for (const BlockIds& b : blocks_) {
      params_.init_constant(b.ln1_g, T(1));
      params_.init_constant(b.ln1_b, T(0));
      init_xavier(b.qkv_w, rng);
      params_.init_constant(b.qkv_b, T(0));
      init_xavier(b.proj_w, rng);
      params_.init_constant(b.proj_b, T(0));
      params_.init_constant(b.ln2_g, T(1));
      params_.init_constant(b.ln2_b, T(0));
      init_xavier(b.fc1_w, rng);
      params_.init_constant(b.fc1_b, T(0));
      init_xavier(b.fc2_w, rng);
      params_.init_constant(b.fc2_b, T(0));
    }
    params_.init_constant(lnf_g_, T(1));
    params_.init_constant(lnf_b_, T(0));
    for (int w : {atom_w_, bond_w_, motif_w_, reg_w_}) {
      if (w >= 0) init_xavier(w, rng);
    }
    for (int b : {atom_b_, bond_b_, motif_b_, reg_b_}) {
      if (b >= 0) params_.init_constant(b, T(0));
    }
  }

  std::vector<T> block_forward(const std::vector<T>& t_in,
                               const BlockIds& ids,
                               BlockCache<T>& c) const {
    int s = cfg_.seq_len();
    int d = cfg_.embed_dim;
    int h = cfg_.heads;
    int dh = d / h;
    int m = d * cfg_.mlp_ratio;
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    c.t_in = t_in;
    c.a_norm.assign(static_cast<std::size_t>(s) * d, T(0));
    c.ln1_mean.assign(static_cast<std::size_t>(s), T(0));
    c.ln1_rstd.assign(static_cast<std::size_t>(s), T(0));
    detail::layer_norm_forward(c.t_in.data(), s, d, params_.data(ids.ln1_g),
                               params_.data(ids.ln1_b), c.a_norm.data(),
                               c.ln1_mean.data(), c.ln1_rstd.data());

    c.qkv.assign(static_cast<std::size_t>(s) * 3 * d, T(0));
    const T* wqkv = params_.data(ids.qkv_w);
    const T* bqkv = params_.data(ids.qkv_b);
    for (int t = 0; t < s; ++t) {
      const T* a = c.a_norm.data() + static_cast<std::size_t>(t) * d;
      T* q = c.qkv.data() + static_cast<std::size_t>(t) * 3 * d;
      for (int j = 0; j < 3 * d; ++j) {
        const T* wrow = wqkv + static_cast<std::size_t>(j) * d;
        T acc = bqkv[j];
        for (int dd = 0; dd < d; ++dd) acc += wrow[dd] * a[dd];
        q[j] = acc;
      }
    }

    c.attn.assign(static_cast<std::size_t>(h) * s * s, T(0));
    c.attn_out.assign(static_cast<std::size_t>(s) * d, T(0));
    for (int hd = 0; hd < h; ++hd) {
      T* probs = c.attn.data() + static_cast<std::size_t>(hd) * s * s;
      for (int t = 0; t < s; ++t) {
        const T* qt =
            c.qkv.data() + static_cast<std::size_t>(t) * 3 * d + hd * dh;
        T* row = probs + static_cast<std::size_t>(t) * s;
        double mx = -1e300;
        for (int u = 0; u < s; ++u) {
          const T* ku = c.qkv.data() + static_cast<std::size_t>(u) * 3 * d +
                        d + hd * dh;
          double acc = 0.0;
          for (int i = 0; i < dh; ++i) {
            acc += static_cast<double>(qt[i]) * static_cast<double>(ku[i]);
          }
          acc *= scale;
          row[u] = static_cast<T>(acc);
          mx = std::max(mx, acc);
        }
        double denom = 0.0;
        for (int u = 0; u < s; ++u) {
          double e = std::exp(static_cast<double>(row[u]) - mx);
          row[u] = static_cast<T>(e);
          denom += e;
        }
        for (int u = 0; u < s; ++u) {
          row[u] = static_cast<T>(static_cast<double>(row[u]) / denom);
        }
        T* out = c.attn_out.data() + static_cast<std::size_t>(t) * d + hd * dh;
        for (int i = 0; i < dh; ++i) {
          double acc = 0.0;
          for (int u = 0; u < s; ++u) {
            const T* vu = c.qkv.data() + static_cast<std::size_t>(u) * 3 * d +
                          2 * d + hd * dh;
            acc += static_cast<double>(row[u]) * static_cast<double>(vu[i]);
          }
          out[i] = static_cast<T>(acc);
        }
      }
    }

    c.t_mid.assign(static_cast<std::size_t>(s) * d, T(0));
    const T* wo = params_.data(ids.proj_w);
    const T* bo = params_.data(ids.proj_b);
    for (int t = 0; t < s; ++t) {
      const T* o = c.attn_out.data() + static_cast<std::size_t>(t) * d;
      const T* in = c.t_in.data() + static_cast<std::size_t>(t) * d;
      T* mid = c.t_mid.data() + static_cast<std::size_t>(t) * d;
      for (int dd = 0; dd < d; ++dd) {
        const T* wrow = wo + static_cast<std::size_t>(dd) * d;
        T acc = bo[dd];
        for (int e = 0; e < d; ++e) acc += wrow[e] * o[e];
        mid[dd] = in[dd] + acc;
      }
    }

    c.b_norm.assign(static_cast<std::size_t>(s) * d, T(0));
    c.ln2_mean.assign(static_cast<std::size_t>(s), T(0));
    c.ln2_rstd.assign(static_cast<std::size_t>(s), T(0));
    detail::layer_norm_forward(c.t_mid.data(), s, d, params_.data(ids.ln2_g),
                               params_.data(ids.ln2_b), c.b_norm.data(),
                               c.ln2_mean.data(), c.ln2_rstd.data());

    c.f1.assign(static_cast<std::size_t>(s) * m, T(0));
    c.g.assign(static_cast<std::size_t>(s) * m, T(0));
    const T* w1 = params_.data(ids.fc1_w);
    const T* b1 = params_.data(ids.fc1_b);
    const T* w2 = params_.data(ids.fc2_w);
    const T* b2 = params_.data(ids.fc2_b);
    std::vector<T> t_out(static_cast<std::size_t>(s) * d, T(0));
    for (int t = 0; t < s; ++t) {
      const T* bn = c.b_norm.data() + static_cast<std::size_t>(t) * d;
      T* f1 = c.f1.data() + static_cast<std::size_t>(t) * m;
      T* g = c.g.data() + static_cast<std::size_t>(t) * m;
      for (int mm = 0; mm < m; ++mm) {
        const T* wrow = w1 + static_cast<std::size_t>(mm) * d;
        T acc = b1[mm];
        for (int dd = 0; dd < d; ++dd) acc += wrow[dd] * bn[dd];
        f1[mm] = acc;
        g[mm] = detail::gelu(acc);
      }
      const T* mid = c.t_mid.data() + static_cast<std::size_t>(t) * d;
      T* out = t_out.data() + static_cast<std::size_t>(t) * d;
      for (int dd = 0; dd < d; ++dd) {
        const T* wrow = w2 + static_cast<std::size_t>(dd) * m;
        T acc = b2[dd];
        for (int mm = 0; mm < m; ++mm) acc += wrow[mm] * g[mm];
        out[dd] = mid[dd] + acc;
      }
    }
    return t_out;
  }

  std::vector<T> block_backward(const std::vector<T>& dt_out,
                                const BlockIds& ids, const BlockCache<T>& c) {
    int s = cfg_.seq_len();
    int d = cfg_.embed_dim;
    int h = cfg_.heads;
    int dh = d / h;
    int m = d * cfg_.mlp_ratio;
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    // MLP path: t_out = t_mid + fc2(gelu(fc1(b_norm))).
    std::vector<T> db_norm(static_cast<std::size_t>(s) * d, T(0));
    const T* w1 = params_.data(ids.fc1_w);
    const T* w2 = params_.data(ids.fc2_w);
    T* dw1 = params_.grad(ids.fc1_w);
    T* db1 = params_.grad(ids.fc1_b);
    T* dw2 = params_.grad(ids.fc2_w);
    T* db2 = params_.grad(ids.fc2_b);
    std::vector<T> df1(static_cast<std::size_t>(m), T(0));
    for (int t = 0; t < s; ++t) {
      const T* dout = dt_out.data() + static_cast<std::size_t>(t) * d;
      const T* g = c.g.data() + static_cast<std::size_t>(t) * m;
      const T* f1 = c.f1.data() + static_cast<std::size_t>(t) * m;
      const T* bn = c.b_norm.data() + static_cast<std::size_t>(t) * d;
      std::fill(df1.begin(), df1.end(), T(0));
      for (int dd = 0; dd < d; ++dd) {
        T gd = dout[dd];
        if (gd == T(0)) continue;
        const T* wrow = w2 + static_cast<std::size_t>(dd) * m;
        T* dwrow = dw2 + static_cast<std::size_t>(dd) * m;
        for (int mm = 0; mm < m; ++mm) {
          dwrow[mm] += gd * g[mm];
          df1[static_cast<std::size_t>(mm)] += gd * wrow[mm];
        }
        db2[dd] += gd;
      }
      T* dbn = db_norm.data() + static_cast<std::size_t>(t) * d;
      for (int mm = 0; mm < m; ++mm) {
        T gm = df1[static_cast<std::size_t>(mm)] * detail::gelu_grad(f1[mm]);
        if (gm == T(0)) continue;
        const T* wrow = w1 + static_cast<std::size_t>(mm) * d;
        T* dwrow = dw1 + static_cast<std::size_t>(mm) * d;
        for (int dd = 0; dd < d; ++dd) {
          dwrow[dd] += gm * bn[dd];
          dbn[dd] += gm * wrow[dd];
        }
        db1[mm] += gm;
      }
    }

    std::vector<T> dt_mid = dt_out;  // residual branch
    {
      std::vector<T> dmid_ln(static_cast<std::size_t>(s) * d, T(0));
      detail::layer_norm_backward(c.t_mid.data(), db_norm.data(), s, d,
                                  params_.data(ids.ln2_g), c.ln2_mean.data(),
                                  c.ln2_rstd.data(), dmid_ln.data(),
                                  params_.grad(ids.ln2_g),
                                  params_.grad(ids.ln2_b));
      for (std::size_t i = 0; i < dt_mid.size(); ++i) dt_mid[i] += dmid_ln[i];
    }

    // Attention path: t_mid = t_in + proj(attn_out).
    std::vector<T> dattn_out(static_cast<std::size_t>(s) * d, T(0));
    const T* wo = params_.data(ids.proj_w);
    T* dwo = params_.grad(ids.proj_w);
    T* dbo = params_.grad(ids.proj_b);
    for (int t = 0; t < s; ++t) {
      const T* dmid = dt_mid.data() + static_cast<std::size_t>(t) * d;
      const T* o = c.attn_out.data() + static_cast<std::size_t>(t) * d;
      T* dao = dattn_out.data() + static_cast<std::size_t>(t) * d;
      for (int dd = 0; dd < d; ++dd) {
        T gd = dmid[dd];
        if (gd == T(0)) continue;
        const T* wrow = wo + static_cast<std::size_t>(dd) * d;
        T* dwrow = dwo + static_cast<std::size_t>(dd) * d;
        for (int e = 0; e < d; ++e) {
          dwrow[e] += gd * o[e];
          dao[e] += gd * wrow[e];
        }
        dbo[dd] += gd;
      }
    }

    std::vector<T> dqkv(static_cast<std::size_t>(s) * 3 * d, T(0));
    std::vector<T> dp(static_cast<std::size_t>(s), T(0));
    for (int hd = 0; hd < h; ++hd) {
      const T* probs = c.attn.data() + static_cast<std::size_t>(hd) * s * s;
      for (int t = 0; t < s; ++t) {
        const T* row = probs + static_cast<std::size_t>(t) * s;
        const T* dao =
            dattn_out.data() + static_cast<std::size_t>(t) * d + hd * dh;
        // dP and dV from out = P . V
        double dot = 0.0;
        for (int u = 0; u < s; ++u) {
          const T* vu = c.qkv.data() + static_cast<std::size_t>(u) * 3 * d +
                        2 * d + hd * dh;
          double acc = 0.0;
          for (int i = 0; i < dh; ++i) {
            acc += static_cast<double>(dao[i]) * static_cast<double>(vu[i]);
          }
          dp[static_cast<std::size_t>(u)] = static_cast<T>(acc);
          dot += acc * static_cast<double>(row[u]);
          T* dvu = dqkv.data() + static_cast<std::size_t>(u) * 3 * d + 2 * d +
                   hd * dh;
          for (int i = 0; i < dh; ++i) {
            dvu[i] += row[u] * dao[i];
          }
        }
        // softmax backward, then dQ/dK through the scaled dot product
        const T* qt =
            c.qkv.data() + static_cast<std::size_t>(t) * 3 * d + hd * dh;
        T* dqt = dqkv.data() + static_cast<std::size_t>(t) * 3 * d + hd * dh;
        for (int u = 0; u < s; ++u) {
          double ds = static_cast<double>(row[u]) *
                      (static_cast<double>(dp[static_cast<std::size_t>(u)]) -
                       dot) *
                      scale;
          if (ds == 0.0) continue;
          const T* ku = c.qkv.data() + static_cast<std::size_t>(u) * 3 * d +
                        d + hd * dh;
          T* dku = dqkv.data() + static_cast<std::size_t>(u) * 3 * d + d +
                   hd * dh;
          for (int i = 0; i < dh; ++i) {
            dqt[i] += static_cast<T>(ds * static_cast<double>(ku[i]));
            dku[i] += static_cast<T>(ds * static_cast<double>(qt[i]));
          }
        }
      }
    }

    std::vector<T> da_norm(static_cast<std::size_t>(s) * d, T(0));
    const T* wqkv = params_.data(ids.qkv_w);
    T* dwqkv = params_.grad(ids.qkv_w);
    T* dbqkv = params_.grad(ids.qkv_b);
    for (int t = 0; t < s; ++t) {
      const T* dq = dqkv.data() + static_cast<std::size_t>(t) * 3 * d;
      const T* a = c.a_norm.data() + static_cast<std::size_t>(t) * d;
      T* da = da_norm.data() + static_cast<std::size_t>(t) * d;
      for (int j = 0; j < 3 * d; ++j) {
        T gj = dq[j];
        if (gj == T(0)) continue;
        const T* wrow = wqkv + static_cast<std::size_t>(j) * d;
        T* dwrow = dwqkv + static_cast<std::size_t>(j) * d;
        for (int dd = 0; dd < d; ++dd) {
          dwrow[dd] += gj * a[dd];
          da[dd] += gj * wrow[dd];
        }
        dbqkv[j] += gj;
      }
    }

    std::vector<T> dt_in(static_cast<std::size_t>(s) * d, T(0));
    detail::layer_norm_backward(c.t_in.data(), da_norm.data(), s, d,
                                params_.data(ids.ln1_g), c.ln1_mean.data(),
                                c.ln1_rstd.data(), dt_in.data(),
                                params_.grad(ids.ln1_g),
                                params_.grad(ids.ln1_b));
    for (std::size_t i = 0; i < dt_in.size(); ++i) dt_in[i] += dt_mid[i];
    return dt_in;
  }

  EncoderConfig cfg_;
  HeadWidths heads_;
  ParamStore<T> params_;
  int patch_w_ = -1, patch_b_ = -1, cls_tok_ = -1, pos_emb_ = -1;
  std::vector<BlockIds> blocks_;
  int lnf_g_ = -1, lnf_b_ = -1;
  int atom_w_ = -1, atom_b_ = -1;
  int bond_w_ = -1, bond_b_ = -1;
  int motif_w_ = -1, motif_b_ = -1;
  int reg_w_ = -1, reg_b_ = -1;
};

}  // namespace cliffmask::model

#endif  // CLIFFMASK_MODEL_VIT_HPP
