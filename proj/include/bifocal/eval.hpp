#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "bifocal/attention.hpp"
#include "bifocal/errors.hpp"
#include "bifocal/fragments.hpp"
#include "bifocal/matrix.hpp"
#include "bifocal/relevance.hpp"
#include "bifocal/synthdata.hpp"
#include "bifocal/training.hpp"

namespace bifocal {

// Which PairScore field fills the score matrix; T2IOnly / I2TOnly are the
// single-direction ablations.
enum class ScoreMode { Total, T2IOnly, I2TOnly };

inline const char* score_mode_name(ScoreMode m) {
  switch (m) {
    case ScoreMode::Total: return "both";
    case ScoreMode::T2IOnly: return "t2i";
    default: return "i2t";
  }
}

inline ScoreMode parse_score_mode(const std::string& s) {
  if (s == "both") return ScoreMode::Total;
  if (s == "t2i") return ScoreMode::T2IOnly;
  if (s == "i2t") return ScoreMode::I2TOnly;
  throw ConfigError("unknown direction '" + s + "' (expected both|t2i|i2t)");
}

struct RetrievalMetrics {
  std::map<std::size_t, double> t2i_recall;  // K -> Recall@K, text queries
  std::map<std::size_t, double> i2t_recall;  // K -> Recall@K, image queries
  double t2i_rmean = 0.0;
  double i2t_rmean = 0.0;
  double rsum = 0.0;  // sum of every reported recall cell
};

// Fraction of queries whose linked counterpart appears in the top-k scores.
// Ties rank the lower candidate index first.
inline double recall_at_k(
    const ScoreMatrix& scores,
    const std::vector<std::pair<std::size_t, std::size_t>>& links,
    std::size_t k, Direction direction) {
  const bool t2i = direction == Direction::T2I;
  const std::size_t queries = t2i ? scores.rows : scores.cols;
  const std::size_t candidates = t2i ? scores.cols : scores.rows;
  if (k < 1 || k > candidates) {
    throw ConfigError("recall_at_k: k = " + std::to_string(k) +
                      " out of range for " + std::to_string(candidates) +
                      " candidates");
  }
  std::vector<std::vector<std::size_t>> linked(queries);
  for (const auto& [t, i] : links) {
    if (t >= scores.rows || i >= scores.cols) {
      throw DataError("recall_at_k: link outside score matrix");
    }
    linked[t2i ? t : i].push_back(t2i ? i : t);
  }
  std::vector<std::size_t> rank(candidates);
  std::size_t hits = 0, asked = 0;
  for (std::size_t q = 0; q < queries; ++q) {
    if (linked[q].empty()) continue;
    ++asked;
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    const auto score_of = [&](std::size_t c) {
      return t2i ? scores.at(q, c) : scores.at(c, q);
    };
    std::partial_sort(rank.begin(), rank.begin() + k, rank.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double sa = score_of(a), sb = score_of(b);
                        return sa != sb ? sa > sb : a < b;
                      });
    const bool hit = std::any_of(
        rank.begin(), rank.begin() + k, [&](std::size_t c) {
          return std::find(linked[q].begin(), linked[q].end(), c) !=
                 linked[q].end();
        });
    if (hit) ++hits;
  }
  if (asked == 0) throw DataError("recall_at_k: no query has any link");
  return static_cast<double>(hits) / static_cast<double>(asked);
}

// Metrics over an existing score matrix. Ks larger than the candidate count
// are dropped (a 3-image corpus has no Recall@5 cell).
inline RetrievalMetrics metrics_from_scores(
    const ScoreMatrix& scores,
    const std::vector<std::pair<std::size_t, std::size_t>>& links,
    const std::vector<std::size_t>& ks = {1, 5}) {
  RetrievalMetrics m;
  for (std::size_t k : ks) {
    if (k <= scores.cols) {
      m.t2i_recall[k] = recall_at_k(scores, links, k, Direction::T2I);
    }
    if (k <= scores.rows) {
      m.i2t_recall[k] = recall_at_k(scores, links, k, Direction::I2T);
    }
  }
  if (m.t2i_recall.empty() && m.i2t_recall.empty()) {
    throw ConfigError("metrics_from_scores: no feasible K");
  }
  for (const auto& [k, v] : m.t2i_recall) m.t2i_rmean += v;
  for (const auto& [k, v] : m.i2t_recall) m.i2t_rmean += v;
  m.rsum = m.t2i_rmean + m.i2t_rmean;
  if (!m.t2i_recall.empty()) m.t2i_rmean /= double(m.t2i_recall.size());
  if (!m.i2t_recall.empty()) m.i2t_rmean /= double(m.i2t_recall.size());
  return m;
}

inline std::vector<std::pair<std::size_t, std::size_t>> corpus_links(
    const Corpus& corpus) {
  std::vector<std::pair<std::size_t, std::size_t>> links;
  links.reserve(corpus.pairs.size());
  for (const auto& [tid, iid] : corpus.pairs) {
    links.emplace_back(*corpus.find_text(tid), *corpus.find_image(iid));
  }
  return links;
}

// Full texts-by-images score matrix under the model's projections.
inline ScoreMatrix model_score_matrix(const ProjectionModel& model,
                                      const Corpus& corpus,
                                      const FocalConfig& focal,
                                      ScoreMode mode = ScoreMode::Total) {
  std::vector<EmbedMatrixD> t, v;
  t.reserve(corpus.texts.size());
  v.reserve(corpus.images.size());
  for (const auto& inst : corpus.texts) t.push_back(project(model, inst));
  for (const auto& inst : corpus.images) v.push_back(project(model, inst));
  ScoreMatrix s(t.size(), v.size());
  for (std::size_t a = 0; a < t.size(); ++a) {
    for (std::size_t b = 0; b < v.size(); ++b) {
      const PairScore ps = pair_score(t[a], v[b], focal);
      s.at(a, b) = mode == ScoreMode::Total ? ps.total
                   : mode == ScoreMode::T2IOnly ? ps.t2i
                                                : ps.i2t;
    }
  }
  return s;
}

inline RetrievalMetrics evaluate(const ProjectionModel& model,
                                 const Corpus& corpus,
                                 const FocalConfig& focal,
                                 ScoreMode mode = ScoreMode::Total,
                                 const std::vector<std::size_t>& ks = {1, 5}) {
  return metrics_from_scores(model_score_matrix(model, corpus, focal, mode),
                             corpus_links(corpus), ks);
}

// Element-wise mean of two score matrices.
inline ScoreMatrix ensemble_scores(const ScoreMatrix& a,
                                   const ScoreMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw DataError("ensemble_scores: shape mismatch");
  }
  ScoreMatrix out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    out.values[i] = 0.5 * (a.values[i] + b.values[i]);
  }
  return out;
}

// How well a focal mask recovers concept-level ground truth, plus the mean
// per-row attention mass landing on irrelevant fragments before and after
// the focal step.  Mass means run over query rows that have at least one
// relevant candidate; a row with none carries mass 1 both before and after
// by row-stochasticity, so it says nothing about the mask.  With no
// qualifying row both masses are 0.
struct MaskQuality {
  double precision = 0.0;
  double recall = 0.0;  // defined as 1 when there are no true entries
  double irrelevant_mass_pre = 0.0;
  double irrelevant_mass_post = 0.0;
};

inline MaskQuality mask_quality(const FocalMask& mask, const FocalMask& truth,
                                const AttentionMap& preassigned,
                                const FocalConfig& config = {}) {
  if (mask.queries != truth.queries || mask.candidates != truth.candidates ||
      mask.queries != preassigned.queries ||
      mask.candidates != preassigned.candidates) {
    throw DataError("mask_quality: shape mismatch");
  }
  std::size_t kept = 0, true_n = 0, both = 0;
  double pre = 0.0, post = 0.0;
  std::size_t mass_rows = 0;
  for (std::size_t i = 0; i < mask.queries; ++i) {
    const auto w = preassigned.row(i);
    const auto re = reassign(w, mask.row(i), config);
    double row_pre = 0.0, row_post = 0.0;
    bool any_true = false;
    for (std::size_t j = 0; j < mask.candidates; ++j) {
      const bool k = mask.at(i, j);
      const bool t = truth.at(i, j);
      kept += k;
      true_n += t;
      both += k && t;
      any_true = any_true || t;
      if (!t) {
        row_pre += w[j];
        row_post += re[j];
      }
    }
    if (any_true) {
      pre += row_pre;
      post += row_post;
      ++mass_rows;
    }
  }
  MaskQuality q;
  q.precision = kept ? double(both) / double(kept) : 1.0;
  q.recall = true_n ? double(both) / double(true_n) : 1.0;
  q.irrelevant_mass_pre = mass_rows ? pre / double(mass_rows) : 0.0;
  q.irrelevant_mass_post = mass_rows ? post / double(mass_rows) : 0.0;
  return q;
}

// mask_quality aggregated over every pair of a labelled corpus, covering
// both query directions.  Mass means follow the mask_quality convention:
// only query rows with at least one relevant candidate enter them.
inline MaskQuality corpus_mask_quality(const ProjectionModel& model,
                                       const Corpus& corpus,
                                       const FocalConfig& focal) {
  double pre = 0.0, post = 0.0;
  std::size_t mass_rows = 0;
  std::size_t kept = 0, true_n = 0, both = 0;
  for (const auto& [tid, iid] : corpus.pairs) {
    const Instance& text = corpus.texts[*corpus.find_text(tid)];
    const Instance& image = corpus.images[*corpus.find_image(iid)];
    const EmbedMatrixD t = project(model, text);
    const EmbedMatrixD v = project(model, image);
    const FocalMask truth = ground_truth_mask(text, image);
    FocalMask truth_t(truth.candidates, truth.queries);
    for (std::size_t i = 0; i < truth.queries; ++i) {
      for (std::size_t j = 0; j < truth.candidates; ++j) {
        truth_t.bits[j * truth.queries + i] = truth.bits[i * truth.candidates + j];
      }
    }
    for (int dir = 0; dir < 2; ++dir) {
      const FocalResult res = dir == 0 ? focal_attend(t, v, focal)
                                       : focal_attend(v, t, focal);
      const FocalMask& gt = dir == 0 ? truth : truth_t;
      for (std::size_t i = 0; i < res.mask.queries; ++i) {
        const auto w = res.preassigned.row(i);
        const auto re = res.reassigned.row(i);
        double row_pre = 0.0, row_post = 0.0;
        bool any_true = false;
        for (std::size_t j = 0; j < res.mask.candidates; ++j) {
          const bool k = res.mask.at(i, j);
          const bool tr = gt.at(i, j);
          kept += k;
          true_n += tr;
          both += k && tr;
          any_true = any_true || tr;
          if (!tr) {
            row_pre += w[j];
            row_post += re[j];
          }
        }
        if (any_true) {
          pre += row_pre;
          post += row_post;
          ++mass_rows;
        }
      }
    }
  }
  MaskQuality q;
  q.precision = kept ? double(both) / double(kept) : 1.0;
  q.recall = true_n ? double(both) / double(true_n) : 1.0;
  q.irrelevant_mass_pre = mass_rows ? pre / double(mass_rows) : 0.0;
  q.irrelevant_mass_post = mass_rows ? post / double(mass_rows) : 0.0;
  return q;
}

}  // namespace bifocal
