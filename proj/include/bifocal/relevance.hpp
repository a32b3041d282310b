#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <vector>

#include "bifocal/attention.hpp"
#include "bifocal/errors.hpp"
#include "bifocal/matrix.hpp"

namespace bifocal {

struct PairScore {
  double t2i = 0.0;
  double i2t = 0.0;
  double total = 0.0;  // always t2i + i2t exactly

  bool operator==(const PairScore&) const = default;
};

// Diagnostic: exact cancellations producing a zero aggregated vector.
// Local relevance is defined as 0 there instead of aborting mid-batch.
inline std::atomic<std::uint64_t>& zero_aggregate_count() {
  static std::atomic<std::uint64_t> count{0};
  return count;
}

inline double local_relevance(std::span<const double> query_frag,
                              std::span<const double> aggregated) {
  if (query_frag.size() != aggregated.size()) {
    throw DataError("local_relevance: dimension mismatch");
  }
  const double na = detail::norm(query_frag);
  const double nc = detail::norm(aggregated);
  if (nc == 0.0) {
    zero_aggregate_count().fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return detail::dot(query_frag, aggregated) / (na * nc);
}

// Mean over fixed-side fragments of the cosine between each fragment and
// its focal-aggregated counterpart built from `other`.
inline double direction_relevance(const EmbedMatrixD& fixed,
                                  const EmbedMatrixD& other,
                                  const FocalConfig& config) {
  const FocalResult res = focal_attend(fixed, other, config);
  double acc = 0.0;
  for (std::size_t i = 0; i < fixed.rows; ++i) {
    acc += local_relevance(fixed.row(i), res.aggregated.row(i));
  }
  return acc / static_cast<double>(fixed.rows);
}

inline PairScore pair_score(const EmbedMatrixD& text, const EmbedMatrixD& image,
                            const FocalConfig& config) {
  PairScore s;
  s.t2i = direction_relevance(text, image, config);
  s.i2t = direction_relevance(image, text, config);
  s.total = s.t2i + s.i2t;
  return s;
}

// Entry (a, b) = pair_score(texts[a], images[b]).total.
inline ScoreMatrix score_matrix(const std::vector<EmbedMatrixD>& texts,
                                const std::vector<EmbedMatrixD>& images,
                                const FocalConfig& config) {
  if (texts.empty() || images.empty()) {
    throw DataError("score_matrix: empty batch");
  }
  ScoreMatrix m(texts.size(), images.size());
  for (std::size_t a = 0; a < texts.size(); ++a) {
    for (std::size_t b = 0; b < images.size(); ++b) {
      m.at(a, b) = pair_score(texts[a], images[b], config).total;
    }
  }
  return m;
}

}  // namespace bifocal
