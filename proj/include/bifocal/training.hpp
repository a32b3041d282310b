#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bifocal/attention.hpp"
#include "bifocal/binio.hpp"
#include "bifocal/errors.hpp"
#include "bifocal/fragments.hpp"
#include "bifocal/matrix.hpp"
#include "bifocal/relevance.hpp"
#include "bifocal/rng.hpp"

namespace bifocal {

// Linear projection per modality: row_out = row_raw * W + b. Parameters are
// held in double for training; checkpoints store them as 32-bit floats.
struct ProjectionModel {
  std::size_t dim = 0;
  std::size_t d_raw_txt = 0;
  std::size_t d_raw_img = 0;
  bool use_bias = true;
  Variant variant = Variant::Prob;  // variant the model was trained with
  std::uint64_t seed = 0;

  std::vector<double> w_txt;  // row-major, d_raw_txt x dim
  std::vector<double> w_img;  // row-major, d_raw_img x dim
  std::vector<double> b_txt;  // dim (all zero when use_bias is false)
  std::vector<double> b_img;

  bool operator==(const ProjectionModel&) const = default;

  std::vector<std::pair<std::string, std::vector<double>*>> blocks() {
    return {{"W_txt", &w_txt},
            {"b_txt", &b_txt},
            {"W_img", &w_img},
            {"b_img", &b_img}};
  }
};

struct LossConfig {
  double margin = 0.2;

  void validate() const {
    if (!(margin >= 0.0)) throw ConfigError("margin must be >= 0");
  }
};

enum class Optimizer { Sgd, Adam };

inline const char* optimizer_name(Optimizer o) {
  return o == Optimizer::Sgd ? "sgd" : "adam";
}

inline Optimizer parse_optimizer(const std::string& s) {
  if (s == "sgd") return Optimizer::Sgd;
  if (s == "adam") return Optimizer::Adam;
  throw ConfigError("unknown optimizer '" + s + "' (expected sgd|adam)");
}

struct TrainConfig {
  double learning_rate = 2e-4;
  std::size_t batch_size = 32;
  std::size_t epochs = 15;
  double lr_decay = 0.1;  // applied after every 10 epochs
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::Adam;

  // learning_rate 0 and epochs 0 are legal no-ops: the returned model equals
  // its initialization.
  void validate() const {
    if (!(learning_rate >= 0.0)) {
      throw ConfigError("learning_rate must be >= 0");
    }
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
      throw ConfigError("lr_decay must be in (0, 1]");
    }
  }
};

// Weight draw order is fixed (W_txt then W_img, row-major) so that a seed
// fully determines the model. Biases start at zero.
inline ProjectionModel init_model(std::size_t dim, std::size_t d_raw_txt,
                                  std::size_t d_raw_img, bool use_bias,
                                  Variant variant, std::uint64_t seed) {
  if (dim < 1 || d_raw_txt < 1 || d_raw_img < 1) {
    throw ConfigError("model dimensions must be >= 1");
  }
  ProjectionModel m;
  m.dim = dim;
  m.d_raw_txt = d_raw_txt;
  m.d_raw_img = d_raw_img;
  m.use_bias = use_bias;
  m.variant = variant;
  m.seed = seed;
  m.b_txt.assign(dim, 0.0);
  m.b_img.assign(dim, 0.0);
  Rng rng(seed);
  const double s_txt = 1.0 / std::sqrt(static_cast<double>(d_raw_txt));
  m.w_txt.resize(d_raw_txt * dim);
  for (double& w : m.w_txt) w = rng.uniform(-s_txt, s_txt);
  const double s_img = 1.0 / std::sqrt(static_cast<double>(d_raw_img));
  m.w_img.resize(d_raw_img * dim);
  for (double& w : m.w_img) w = rng.uniform(-s_img, s_img);
  return m;
}

inline EmbedMatrixD project(const ProjectionModel& model,
                            const Instance& inst) {
  const bool is_text = inst.modality == Modality::Text;
  const std::size_t d_raw = is_text ? model.d_raw_txt : model.d_raw_img;
  const std::vector<double>& w = is_text ? model.w_txt : model.w_img;
  const std::vector<double>& b = is_text ? model.b_txt : model.b_img;
  if (inst.raw.dim != d_raw) {
    throw DataError("project: instance " + inst.id + " has raw dim " +
                    std::to_string(inst.raw.dim) + ", model expects " +
                    std::to_string(d_raw));
  }
  EmbedMatrixD out(inst.raw.rows, model.dim);
  for (std::size_t i = 0; i < inst.raw.rows; ++i) {
    const auto raw = inst.raw.row(i);
    auto dst = out.row(i);
    for (std::size_t k = 0; k < model.dim; ++k) dst[k] = b[k];
    for (std::size_t r = 0; r < d_raw; ++r) {
      const double x = static_cast<double>(raw[r]);
      const double* wr = w.data() + r * model.dim;
      for (std::size_t k = 0; k < model.dim; ++k) dst[k] += x * wr[k];
    }
  }
  return out;
}

struct TripletResult {
  double loss = 0.0;
  std::vector<std::size_t> hard_neg_rows;  // per diagonal k: argmax_{t!=k} S[t][k]
  std::vector<std::size_t> hard_neg_cols;  // per diagonal k: argmax_{t!=k} S[k][t]
};

// Hard-negative triplet loss over a square batch score matrix with relevant
// pairs on the diagonal. Ties in the argmax go to the lowest index; the
// reduction over the batch is the mean.
inline TripletResult triplet_loss(const ScoreMatrix& scores,
                                  const LossConfig& cfg) {
  cfg.validate();
  if (scores.rows != scores.cols) {
    throw DataError("triplet_loss: score matrix must be square, got " +
                    std::to_string(scores.rows) + "x" +
                    std::to_string(scores.cols));
  }
  const std::size_t b = scores.rows;
  if (b < 2) {
    throw DataError("triplet_loss: batch of size " + std::to_string(b) +
                    " has no negatives");
  }
  TripletResult res;
  res.hard_neg_rows.resize(b);
  res.hard_neg_cols.resize(b);
  double total = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    std::size_t u = k == 0 ? 1 : 0;
    std::size_t v = u;
    for (std::size_t t = 0; t < b; ++t) {
      if (t == k) continue;
      if (scores.at(t, k) > scores.at(u, k)) u = t;
      if (scores.at(k, t) > scores.at(k, v)) v = t;
    }
    res.hard_neg_rows[k] = u;
    res.hard_neg_cols[k] = v;
    const double sd = scores.at(k, k);
    total += std::max(0.0, cfg.margin - sd + scores.at(u, k)) +
             std::max(0.0, cfg.margin - sd + scores.at(k, v));
  }
  res.loss = total / static_cast<double>(b);
  return res;
}

// Every discrete decision of one forward pass: all focal mask bits in batch
// scan order plus the selected hard negatives. Two passes whose traces match
// lie on the same smooth piece of the loss.
struct DecisionTrace {
  std::vector<std::uint8_t> mask_bits;
  std::vector<std::size_t> hard_rows;
  std::vector<std::size_t> hard_cols;

  bool operator==(const DecisionTrace&) const = default;
};

struct Gradients {
  std::vector<double> w_txt;
  std::vector<double> b_txt;
  std::vector<double> w_img;
  std::vector<double> b_img;
};

struct BatchResult {
  double loss = 0.0;
  ScoreMatrix scores;
  Gradients grads;  // empty vectors when gradients were not requested
  DecisionTrace trace;
};

namespace detail {

// One direction of one batch cell kept for the backward pass.
struct CellDirection {
  FocalResult focal;
  double relevance = 0.0;
};

// Backward through: relevance = mean_i cos(x_i, agg_i), agg_i = sum_j w'_ij y_j,
// w' = reassign(softmax(scale * cos(x_i, y_j)), mask). Mask bits are constants
// of the forward pass. Accumulates into dx/dy (shapes of fixed/other).
//
// The softmax and the renormalization collapse into one rule: with
// g_j = dLoss/dw'_j and G = sum_j g_j w'_j, the logit gradient is
// dz_j = w'_j (g_j - G). Masked candidates have w'_j = 0, hence exactly
// zero gradient; with an all-true mask this is the plain softmax backward.
inline void direction_backward(const EmbedMatrixD& fixed,
                               const EmbedMatrixD& other,
                               const CellDirection& cell, double upstream,
                               const FocalConfig& config, EmbedMatrixD& dx,
                               EmbedMatrixD& dy) {
  const std::size_t m = fixed.rows;
  const std::size_t n = other.rows;
  const double drel = upstream / static_cast<double>(m);
  std::vector<double> dagg(fixed.dim);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = fixed.row(i);
    const auto c = cell.focal.aggregated.row(i);
    const double nx = norm(x);
    const double nc = norm(c);
    if (nc == 0.0) continue;  // local relevance was pinned to 0
    const double cos_xc = dot(x, c) / (nx * nc);
    auto dxi = dx.row(i);
    for (std::size_t k = 0; k < fixed.dim; ++k) {
      dxi[k] += drel * (c[k] / (nx * nc) - cos_xc * x[k] / (nx * nx));
      dagg[k] = drel * (x[k] / (nx * nc) - cos_xc * c[k] / (nc * nc));
    }
    const auto w = cell.focal.reassigned.row(i);
    double big_g = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto y = other.row(j);
      g[j] = dot(std::span<const double>(dagg), y);
      if (w[j] != 0.0) {
        auto dyj = dy.row(j);
        for (std::size_t k = 0; k < fixed.dim; ++k) dyj[k] += w[j] * dagg[k];
      }
      big_g += g[j] * w[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (w[j] == 0.0) continue;  // masked out: exactly zero gradient
      const double ds = config.scale * w[j] * (g[j] - big_g);
      const auto y = other.row(j);
      const double ny = norm(y);
      const double cos_xy = dot(x, y) / (nx * ny);
      auto dyj = dy.row(j);
      for (std::size_t k = 0; k < fixed.dim; ++k) {
        dxi[k] += ds * (y[k] / (nx * ny) - cos_xy * x[k] / (nx * nx));
        dyj[k] += ds * (x[k] / (nx * ny) - cos_xy * y[k] / (ny * ny));
      }
    }
  }
}

// dW += raw^T * dout; db += column sums of dout.
inline void projection_backward(const Instance& inst, const EmbedMatrixD& dout,
                                bool use_bias, std::vector<double>& dw,
                                std::vector<double>& db) {
  const std::size_t dim = dout.dim;
  for (std::size_t i = 0; i < inst.raw.rows; ++i) {
    const auto raw = inst.raw.row(i);
    const auto go = dout.row(i);
    for (std::size_t r = 0; r < inst.raw.dim; ++r) {
      const double x = static_cast<double>(raw[r]);
      if (x == 0.0) continue;
      double* dwr = dw.data() + r * dim;
      for (std::size_t k = 0; k < dim; ++k) dwr[k] += x * go[k];
    }
    if (use_bias) {
      for (std::size_t k = 0; k < dim; ++k) db[k] += go[k];
    }
  }
}

}  // namespace detail

// Forward pass over a diagonally paired batch, optionally with exact
// reverse-mode gradients. The focal masks and the hard-negative picks are
// treated as constants of the forward pass, so on any mask-stable
// neighborhood the gradients are the true derivatives of the loss.
inline BatchResult forward_backward(const ProjectionModel& model,
                                    const std::vector<Instance>& texts,
                                    const std::vector<Instance>& images,
                                    const FocalConfig& focal,
                                    const LossConfig& loss_cfg,
                                    bool want_grads = true) {
  if (texts.size() != images.size()) {
    throw DataError("forward_backward: " + std::to_string(texts.size()) +
                    " texts vs " + std::to_string(images.size()) + " images");
  }
  const std::size_t b = texts.size();
  if (b < 2) {
    throw DataError("forward_backward: batch must contain >= 2 pairs");
  }

  std::vector<EmbedMatrixD> t(b), v(b);
  for (std::size_t a = 0; a < b; ++a) {
    t[a] = project(model, texts[a]);
    v[a] = project(model, images[a]);
  }

  BatchResult res;
  res.scores = ScoreMatrix(b, b);
  std::vector<detail::CellDirection> t2i(b * b), i2t(b * b);
  for (std::size_t a = 0; a < b; ++a) {
    for (std::size_t c = 0; c < b; ++c) {
      auto& fw = t2i[a * b + c];
      auto& bw = i2t[a * b + c];
      fw.focal = focal_attend(t[a], v[c], focal);
      bw.focal = focal_attend(v[c], t[a], focal);
      double rel_fw = 0.0, rel_bw = 0.0;
      for (std::size_t i = 0; i < t[a].rows; ++i) {
        rel_fw += local_relevance(t[a].row(i), fw.focal.aggregated.row(i));
      }
      for (std::size_t i = 0; i < v[c].rows; ++i) {
        rel_bw += local_relevance(v[c].row(i), bw.focal.aggregated.row(i));
      }
      fw.relevance = rel_fw / static_cast<double>(t[a].rows);
      bw.relevance = rel_bw / static_cast<double>(v[c].rows);
      res.scores.at(a, c) = fw.relevance + bw.relevance;
      res.trace.mask_bits.insert(res.trace.mask_bits.end(),
                                 fw.focal.mask.bits.begin(),
                                 fw.focal.mask.bits.end());
      res.trace.mask_bits.insert(res.trace.mask_bits.end(),
                                 bw.focal.mask.bits.begin(),
                                 bw.focal.mask.bits.end());
    }
  }

  const TripletResult trip = triplet_loss(res.scores, loss_cfg);
  res.loss = trip.loss;
  res.trace.hard_rows = trip.hard_neg_rows;
  res.trace.hard_cols = trip.hard_neg_cols;
  if (!want_grads) return res;

  res.grads.w_txt.assign(model.w_txt.size(), 0.0);
  res.grads.b_txt.assign(model.b_txt.size(), 0.0);
  res.grads.w_img.assign(model.w_img.size(), 0.0);
  res.grads.b_img.assign(model.b_img.size(), 0.0);

  // dLoss/dS is sparse: +-1/b per active hinge.
  ScoreMatrix dscore(b, b);
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t k = 0; k < b; ++k) {
    const double sd = res.scores.at(k, k);
    const std::size_t u = trip.hard_neg_rows[k];
    const std::size_t w = trip.hard_neg_cols[k];
    if (loss_cfg.margin - sd + res.scores.at(u, k) > 0.0) {
      dscore.at(k, k) -= inv_b;
      dscore.at(u, k) += inv_b;
    }
    if (loss_cfg.margin - sd + res.scores.at(k, w) > 0.0) {
      dscore.at(k, k) -= inv_b;
      dscore.at(k, w) += inv_b;
    }
  }

  std::vector<EmbedMatrixD> dt(b), dv(b);
  for (std::size_t a = 0; a < b; ++a) {
    dt[a] = EmbedMatrixD(t[a].rows, model.dim);
    dv[a] = EmbedMatrixD(v[a].rows, model.dim);
  }
  for (std::size_t a = 0; a < b; ++a) {
    for (std::size_t c = 0; c < b; ++c) {
      const double ds = dscore.at(a, c);
      if (ds == 0.0) continue;
      detail::direction_backward(t[a], v[c], t2i[a * b + c], ds, focal, dt[a],
                                 dv[c]);
      detail::direction_backward(v[c], t[a], i2t[a * b + c], ds, focal, dv[c],
                                 dt[a]);
    }
  }
  for (std::size_t a = 0; a < b; ++a) {
    detail::projection_backward(texts[a], dt[a], model.use_bias,
                                res.grads.w_txt, res.grads.b_txt);
    detail::projection_backward(images[a], dv[a], model.use_bias,
                                res.grads.w_img, res.grads.b_img);
  }
  return res;
}

struct GradReport {
  std::map<std::string, double> max_rel_error;  // per parameter block
  bool mask_stable = true;
  std::string boundary_param;  // first parameter whose probe crossed a mask
  std::size_t params_checked = 0;

  double worst() const {
    double w = 0.0;
    for (const auto& [k, e] : max_rel_error) w = std::max(w, e);
    return w;
  }
};

// Central finite differences per parameter. mask_stable holds iff every
// probe reproduced the forward pass's decision trace at both +step and
// -step; the error comparison only means anything on a stable report.
inline GradReport grad_check(const ProjectionModel& model,
                             const std::vector<Instance>& texts,
                             const std::vector<Instance>& images,
                             const FocalConfig& focal,
                             const LossConfig& loss_cfg, double step = 1e-5) {
  const BatchResult base =
      forward_backward(model, texts, images, focal, loss_cfg, true);
  ProjectionModel probe = model;

  GradReport report;
  auto blocks = probe.blocks();
  const std::vector<const std::vector<double>*> grad_blocks = {
      &base.grads.w_txt, &base.grads.b_txt, &base.grads.w_img,
      &base.grads.b_img};
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    auto& [name, values] = blocks[bi];
    if (!probe.use_bias && name[0] == 'b') continue;
    double worst = 0.0;
    for (std::size_t p = 0; p < values->size(); ++p) {
      const double saved = (*values)[p];
      (*values)[p] = saved + step;
      const BatchResult hi =
          forward_backward(probe, texts, images, focal, loss_cfg, false);
      (*values)[p] = saved - step;
      const BatchResult lo =
          forward_backward(probe, texts, images, focal, loss_cfg, false);
      (*values)[p] = saved;
      if (hi.trace != base.trace || lo.trace != base.trace) {
        if (report.mask_stable) {
          report.boundary_param = name + "[" + std::to_string(p) + "]";
        }
        report.mask_stable = false;
      }
      const double numeric = (hi.loss - lo.loss) / (2.0 * step);
      const double a = (*grad_blocks[bi])[p];
      const double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-6});
      worst = std::max(worst, rel);
      ++report.params_checked;
    }
    report.max_rel_error[name] = worst;
  }
  return report;
}

// Adam moments per parameter block; step count shared across blocks.
struct OptimizerState {
  std::vector<std::vector<double>> m, v;
  std::uint64_t step = 0;
};

namespace detail {

inline void apply_update(ProjectionModel& model, const Gradients& grads,
                         const TrainConfig& cfg, double lr,
                         OptimizerState& state) {
  std::vector<std::vector<double>*> params = {&model.w_txt, &model.b_txt,
                                              &model.w_img, &model.b_img};
  const std::vector<const std::vector<double>*> gs = {
      &grads.w_txt, &grads.b_txt, &grads.w_img, &grads.b_img};
  if (cfg.optimizer == Optimizer::Sgd) {
    for (std::size_t bi = 0; bi < params.size(); ++bi) {
      for (std::size_t p = 0; p < params[bi]->size(); ++p) {
        (*params[bi])[p] -= lr * (*gs[bi])[p];
      }
    }
    return;
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (state.m.empty()) {
    for (auto* block : params) {
      state.m.emplace_back(block->size(), 0.0);
      state.v.emplace_back(block->size(), 0.0);
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t bi = 0; bi < params.size(); ++bi) {
    for (std::size_t p = 0; p < params[bi]->size(); ++p) {
      const double g = (*gs[bi])[p];
      double& m = state.m[bi][p];
      double& v = state.v[bi][p];
      m = beta1 * m + (1.0 - beta1) * g;
      v = beta2 * v + (1.0 - beta2) * g * g;
      (*params[bi])[p] -= lr * (m / c1) / (std::sqrt(v / c2) + eps);
    }
  }
}

}  // namespace detail

// Mini-batch training over the corpus's pair list. Deterministic given
// cfg.seed: shuffle order, batch slicing, and update order are all fixed.
// Trailing batches of size 1 are skipped (a lone pair has no negative).
// Returns per-epoch mean batch loss.
inline std::vector<double> train(ProjectionModel& model, const Corpus& corpus,
                                 const TrainConfig& cfg,
                                 const FocalConfig& focal,
                                 const LossConfig& loss_cfg) {
  cfg.validate();
  focal.validate();
  loss_cfg.validate();
  if (corpus.pairs.size() < 2) {
    throw DataError("train: corpus must contain >= 2 pairs");
  }
  std::unordered_map<std::string, const Instance*> by_id;
  for (const auto* side : {&corpus.texts, &corpus.images}) {
    for (const Instance& inst : *side) by_id[inst.id] = &inst;
  }

  Rng rng(cfg.seed);
  OptimizerState state;
  std::vector<std::size_t> order(corpus.pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> epoch_losses;
  epoch_losses.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr =
        cfg.learning_rate * std::pow(cfg.lr_decay, double(epoch / 10));
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + cfg.batch_size);
      if (end - start < 2) break;  // size-1 remainder has no negatives
      std::vector<Instance> texts, images;
      texts.reserve(end - start);
      images.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const auto& [tid, iid] = corpus.pairs[order[i]];
        texts.push_back(*by_id.at(tid));
        images.push_back(*by_id.at(iid));
      }
      const BatchResult res =
          forward_backward(model, texts, images, focal, loss_cfg, true);
      if (!std::isfinite(res.loss)) {
        throw NumericError("train: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batches));
      }
      detail::apply_update(model, res.grads, cfg, lr, state);
      loss_sum += res.loss;
      ++batches;
    }
    epoch_losses.push_back(batches ? loss_sum / double(batches) : 0.0);
  }
  return epoch_losses;
}

// Checkpoint layout: magic "BIFOCAL1", u32 version, u32 dim, u32 d_raw_txt,
// u32 d_raw_img, u32 use_bias, u32 variant, u64 seed, then W_txt, b_txt,
// W_img, b_img as little-endian f32 (bias blocks present only when use_bias).
inline constexpr char kCheckpointMagic[8] = {'B', 'I', 'F', 'O',
                                             'C', 'A', 'L', '1'};

inline void save_checkpoint(const ProjectionModel& model,
                            const std::filesystem::path& path) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kCheckpointMagic, kCheckpointMagic + 8);
  io::put_u32(out, 1);
  io::put_u32(out, static_cast<std::uint32_t>(model.dim));
  io::put_u32(out, static_cast<std::uint32_t>(model.d_raw_txt));
  io::put_u32(out, static_cast<std::uint32_t>(model.d_raw_img));
  io::put_u32(out, model.use_bias ? 1 : 0);
  io::put_u32(out, static_cast<std::uint32_t>(model.variant));
  io::put_u64(out, model.seed);
  auto dump = [&out](const std::vector<double>& block) {
    for (double x : block) io::put_f32(out, static_cast<float>(x));
  };
  dump(model.w_txt);
  if (model.use_bias) dump(model.b_txt);
  dump(model.w_img);
  if (model.use_bias) dump(model.b_img);
  io::write_file(path, out);
}

inline ProjectionModel load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::Reader rd(bytes, path.string());
  const auto magic = rd.bytes(8);
  if (!std::equal(magic.begin(), magic.end(), kCheckpointMagic)) {
    throw DataError(path.string() + ": not a checkpoint file");
  }
  const auto version = rd.u32();
  if (version != 1) {
    throw DataError(path.string() + ": unsupported checkpoint version " +
                    std::to_string(version));
  }
  ProjectionModel m;
  m.dim = rd.u32();
  m.d_raw_txt = rd.u32();
  m.d_raw_img = rd.u32();
  m.use_bias = rd.u32() != 0;
  const auto variant = rd.u32();
  if (variant > 2) {
    throw DataError(path.string() + ": invalid variant tag");
  }
  m.variant = static_cast<Variant>(variant);
  m.seed = rd.u64();
  if (m.dim < 1 || m.d_raw_txt < 1 || m.d_raw_img < 1) {
    throw DataError(path.string() + ": invalid dimensions in header");
  }
  auto slurp = [&rd](std::vector<double>& block, std::size_t count) {
    block.resize(count);
    for (std::size_t i = 0; i < count; ++i) block[i] = rd.f32();
  };
  slurp(m.w_txt, m.d_raw_txt * m.dim);
  m.b_txt.assign(m.dim, 0.0);
  if (m.use_bias) slurp(m.b_txt, m.dim);
  slurp(m.w_img, m.d_raw_img * m.dim);
  m.b_img.assign(m.dim, 0.0);
  if (m.use_bias) slurp(m.b_img, m.dim);
  if (rd.remaining() != 0) {
    throw DataError(path.string() + ": trailing bytes after parameters");
  }
  for (auto& [name, block] : m.blocks()) {
    for (double x : *block) {
      if (!std::isfinite(x)) {
        throw DataError(path.string() + ": non-finite value in " + name);
      }
    }
  }
  return m;
}

}  // namespace bifocal
