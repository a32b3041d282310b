#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bifocal/errors.hpp"
#include "bifocal/matrix.hpp"

namespace bifocal {

enum class Variant { Plain, Equal, Prob };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Plain: return "plain";
    case Variant::Equal: return "equal";
    default: return "prob";
  }
}

inline Variant parse_variant(const std::string& s) {
  if (s == "plain") return Variant::Plain;
  if (s == "equal") return Variant::Equal;
  if (s == "prob") return Variant::Prob;
  throw ConfigError("unknown variant '" + s + "' (expected plain|equal|prob)");
}

struct FocalConfig {
  Variant variant = Variant::Prob;
  double scale = 20.0;   // softmax sharpening factor
  double eps = 1e-8;     // renormalization underflow guard

  void validate() const {
    if (!(scale > 0.0)) throw ConfigError("scale must be > 0");
    if (!(eps > 0.0)) throw ConfigError("eps must be > 0");
  }
};

// w_ij = softmax_j(scale * cos(u_i, v_j)). Max-subtracted for stability;
// every row of the result sums to 1.
inline AttentionMap preassign(const EmbedMatrixD& queries,
                              const EmbedMatrixD& candidates,
                              const FocalConfig& config) {
  config.validate();
  if (queries.dim != candidates.dim) {
    throw DataError("preassign: query dim " + std::to_string(queries.dim) +
                    " != candidate dim " + std::to_string(candidates.dim));
  }
  AttentionMap att;
  att.queries = queries.rows;
  att.candidates = candidates.rows;
  att.weights.resize(queries.rows * candidates.rows);
  std::vector<double> logits(candidates.rows);
  for (std::size_t i = 0; i < queries.rows; ++i) {
    const auto q = queries.row(i);
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < candidates.rows; ++j) {
      logits[j] = config.scale * detail::cosine(q, candidates.row(j));
      hi = std::max(hi, logits[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < candidates.rows; ++j) {
      logits[j] = std::exp(logits[j] - hi);
      denom += logits[j];
    }
    for (std::size_t j = 0; j < candidates.rows; ++j) {
      att.weights[i * candidates.rows + j] = logits[j] / denom;
    }
  }
  return att;
}

// F_j = sum_t (w_j - w_t) * g_t with confidence g_t = 1 (equal) or
// sqrt(w_t) (prob). Computed through the closed form F_j = w_j*S_g - S_wg.
inline std::vector<double> focal_score(std::span<const double> att_row,
                                       const FocalConfig& config) {
  double s_g = 0.0, s_wg = 0.0;
  if (config.variant == Variant::Equal) {
    s_g = static_cast<double>(att_row.size());
    for (double w : att_row) s_wg += w;
  } else {
    for (double w : att_row) {
      const double g = std::sqrt(w);
      s_g += g;
      s_wg += w * g;
    }
  }
  std::vector<double> scores(att_row.size());
  for (std::size_t j = 0; j < att_row.size(); ++j) {
    scores[j] = att_row[j] * s_g - s_wg;
  }
  return scores;
}

// mask_j = (F_j > 0), strict. Empty mask falls back to every entry tied
// for the maximal preassigned weight, so at least one entry survives.
inline std::vector<std::uint8_t> relevant_mask(std::span<const double> scores,
                                               std::span<const double> att_row,
                                               const FocalConfig&) {
  std::vector<std::uint8_t> mask(scores.size(), 0);
  bool any = false;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > 0.0) {
      mask[j] = 1;
      any = true;
    }
  }
  if (!any && !att_row.empty()) {
    const double hi = *std::max_element(att_row.begin(), att_row.end());
    for (std::size_t j = 0; j < att_row.size(); ++j) {
      mask[j] = att_row[j] == hi ? 1 : 0;
    }
  }
  return mask;
}

// w'_j = w_j*mask_j / sum_t w_t*mask_t. eps enters the denominator only
// when the surviving mass underflows; healthy rows renormalize exactly.
inline std::vector<double> reassign(std::span<const double> att_row,
                                    std::span<const std::uint8_t> mask,
                                    const FocalConfig& config) {
  double denom = 0.0;
  bool any = false;
  for (std::size_t j = 0; j < att_row.size(); ++j) {
    if (mask[j]) {
      denom += att_row[j];
      any = true;
    }
  }
  if (!any) throw NumericError("reassign: all-false mask");
  if (denom < config.eps) denom += config.eps;
  std::vector<double> out(att_row.size(), 0.0);
  for (std::size_t j = 0; j < att_row.size(); ++j) {
    if (mask[j]) out[j] = att_row[j] / denom;
  }
  return out;
}

// Weighted sum of candidate rows.
inline std::vector<double> aggregate(std::span<const double> weights,
                                     const EmbedMatrixD& candidates) {
  if (weights.size() != candidates.rows) {
    throw DataError("aggregate: " + std::to_string(weights.size()) +
                    " weights for " + std::to_string(candidates.rows) +
                    " candidate rows");
  }
  std::vector<double> out(candidates.dim, 0.0);
  for (std::size_t j = 0; j < candidates.rows; ++j) {
    const auto row = candidates.row(j);
    for (std::size_t k = 0; k < candidates.dim; ++k) {
      out[k] += weights[j] * row[k];
    }
  }
  return out;
}

struct FocalResult {
  AttentionMap preassigned;
  ScoreMatrix scores;      // F values; all-zero under the plain variant
  FocalMask mask;
  AttentionMap reassigned;
  EmbedMatrixD aggregated;  // one row per query
};

// Full pipeline applied row-wise. The plain variant bypasses scoring and
// masking: mask all true, reassigned map identical to the preassigned map.
inline FocalResult focal_attend(const EmbedMatrixD& queries,
                                const EmbedMatrixD& candidates,
                                const FocalConfig& config) {
  FocalResult res;
  res.preassigned = preassign(queries, candidates, config);
  const std::size_t m = res.preassigned.queries;
  const std::size_t n = res.preassigned.candidates;
  res.scores = ScoreMatrix(m, n);
  res.mask = FocalMask(m, n);
  std::fill(res.mask.bits.begin(), res.mask.bits.end(), std::uint8_t{1});
  res.reassigned = res.preassigned;
  res.aggregated.rows = m;
  res.aggregated.dim = candidates.dim;
  res.aggregated.values.resize(m * candidates.dim);

  for (std::size_t i = 0; i < m; ++i) {
    const auto att_row = res.preassigned.row(i);
    std::span<double> re(res.reassigned.weights.data() + i * n, n);
    if (config.variant != Variant::Plain) {
      const auto f = focal_score(att_row, config);
      const auto h = relevant_mask(f, att_row, config);
      const auto w = reassign(att_row, h, config);
      std::copy(f.begin(), f.end(), res.scores.values.begin() + i * n);
      std::copy(h.begin(), h.end(), res.mask.bits.begin() + i * n);
      std::copy(w.begin(), w.end(), re.begin());
    }
    const auto agg = aggregate(re, candidates);
    std::copy(agg.begin(), agg.end(),
              res.aggregated.values.begin() + i * candidates.dim);
  }
  return res;
}

}  // namespace bifocal
