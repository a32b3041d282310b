#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "bifocal/errors.hpp"
#include "bifocal/fragments.hpp"
#include "bifocal/matrix.hpp"
#include "bifocal/rng.hpp"

namespace bifocal {

struct SynthConfig {
  std::size_t vocab = 16;        // number of latent concepts
  std::size_t d_raw_txt = 48;
  std::size_t d_raw_img = 64;
  std::size_t pairs = 200;
  std::size_t words_lo = 4, words_hi = 8;      // fragments per text
  std::size_t regions_lo = 4, regions_hi = 8;  // fragments per image
  double distractor_rate = 0.5;  // chance a fragment is irrelevant to its pair
  double noise_sigma = 0.1;      // per-dimension additive noise
  std::uint64_t seed = 1;

  void validate() const {
    if (vocab < 2) throw ConfigError("vocab must be >= 2");
    if (d_raw_txt < 1 || d_raw_img < 1) {
      throw ConfigError("raw dimensions must be >= 1");
    }
    if (pairs < 1) throw ConfigError("pairs must be >= 1");
    if (words_lo < 1 || words_lo > words_hi) {
      throw ConfigError("words range must satisfy 1 <= lo <= hi");
    }
    if (regions_lo < 1 || regions_lo > regions_hi) {
      throw ConfigError("regions range must satisfy 1 <= lo <= hi");
    }
    if (!(distractor_rate >= 0.0 && distractor_rate < 1.0)) {
      throw ConfigError("distractor_rate must be in [0, 1)");
    }
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
    // Distractor concepts are drawn to be absent from the counterpart
    // instance; the worst case needs one spare concept beyond the largest
    // instance.
    if (vocab <= std::max(words_hi, regions_hi)) {
      throw ConfigError("vocab must exceed max fragment count " +
                        std::to_string(std::max(words_hi, regions_hi)));
    }
  }
};

namespace detail {

inline std::string zero_padded_id(char prefix, std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%04zu", prefix, k);
  return buf;
}

inline void normalize_in_place(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
}

// vocab unit vectors in R^latent_dim, resampled until pairwise |cos| < 0.3
// so "same concept" is geometrically meaningful.
inline std::vector<std::vector<double>> latent_prototypes(
    std::size_t vocab, std::size_t latent_dim, Rng& rng) {
  std::vector<std::vector<double>> protos;
  protos.reserve(vocab);
  std::size_t attempts = 0;
  const std::size_t cap = 1000 * vocab;
  while (protos.size() < vocab) {
    if (++attempts > cap) {
      throw ConfigError("cannot place " + std::to_string(vocab) +
                        " well-separated concepts in " +
                        std::to_string(latent_dim) + " dimensions");
    }
    std::vector<double> cand(latent_dim);
    for (double& x : cand) x = rng.normal();
    normalize_in_place(cand);
    bool ok = true;
    for (const auto& p : protos) {
      double c = 0.0;
      for (std::size_t k = 0; k < latent_dim; ++k) c += cand[k] * p[k];
      if (std::abs(c) >= 0.3) {
        ok = false;
        break;
      }
    }
    if (ok) protos.push_back(std::move(cand));
  }
  return protos;
}

inline std::size_t draw_avoiding(Rng& rng, std::size_t vocab,
                                 const std::unordered_set<std::size_t>& avoid) {
  for (int i = 0; i < 1000; ++i) {
    const std::size_t c = rng.index(vocab);
    if (!avoid.count(c)) return c;
  }
  throw NumericError("distractor sampling exhausted the vocabulary");
}

}  // namespace detail

// Per-concept raw prototypes for each modality. Text prototypes embed the
// latent concepts directly (zero padded); image prototypes pass them through
// a fixed random linear distortion and land in a different raw space.
struct SynthPrototypes {
  std::vector<std::vector<double>> text;   // vocab rows of d_raw_txt
  std::vector<std::vector<double>> image;  // vocab rows of d_raw_img
};

namespace detail {

inline SynthPrototypes draw_prototypes(const SynthConfig& cfg, Rng& rng) {
  const std::size_t latent_dim = std::min(cfg.d_raw_txt, cfg.d_raw_img);
  const auto latents = latent_prototypes(cfg.vocab, latent_dim, rng);

  // Fixed cross-modal distortion: image latent = normalize(l + 0.45 * G l).
  const double lambda = 0.45;
  std::vector<double> distort(latent_dim * latent_dim);
  const double gscale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
  for (double& x : distort) x = gscale * rng.normal();

  SynthPrototypes protos;
  protos.text.resize(cfg.vocab);
  protos.image.resize(cfg.vocab);
  for (std::size_t c = 0; c < cfg.vocab; ++c) {
    protos.text[c].assign(cfg.d_raw_txt, 0.0);
    std::copy(latents[c].begin(), latents[c].end(), protos.text[c].begin());
    std::vector<double> img(latent_dim, 0.0);
    for (std::size_t r = 0; r < latent_dim; ++r) {
      double acc = 0.0;
      for (std::size_t k = 0; k < latent_dim; ++k) {
        acc += distort[r * latent_dim + k] * latents[c][k];
      }
      img[r] = latents[c][r] + lambda * acc;
    }
    normalize_in_place(img);
    protos.image[c].assign(cfg.d_raw_img, 0.0);
    std::copy(img.begin(), img.end(), protos.image[c].begin());
  }
  return protos;
}

}  // namespace detail

// The prototypes a given config generates from, for inspecting corpora
// against their generating geometry.
inline SynthPrototypes synth_prototypes(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  return detail::draw_prototypes(cfg, rng);
}

// Concept-level relevance ground truth: (i, j) true iff the i-th text
// fragment and the j-th image fragment carry the same concept.
inline FocalMask ground_truth_mask(const Instance& text,
                                   const Instance& image) {
  if (!text.concepts || !image.concepts) {
    throw DataError("ground_truth_mask: instances lack concept labels");
  }
  FocalMask truth(text.raw.rows, image.raw.rows);
  for (std::size_t i = 0; i < text.raw.rows; ++i) {
    for (std::size_t j = 0; j < image.raw.rows; ++j) {
      truth.bits[i * image.raw.rows + j] =
          (*text.concepts)[i] == (*image.concepts)[j] ? 1 : 0;
    }
  }
  return truth;
}

// Pairs share a concept multiset drawn per overlapping fragment slot; each
// remaining slot is a distractor with probability distractor_rate, else a
// duplicate of a shared concept, so the marginal distractor chance is the
// configured rate for every fragment. Text prototypes embed the latent
// concepts directly; image prototypes pass them through a fixed random
// linear distortion, so a trained projection has to undo real structure.
inline Corpus generate_corpus(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const SynthPrototypes protos = detail::draw_prototypes(cfg, rng);
  const auto& txt_protos = protos.text;
  const auto& img_protos = protos.image;

  auto make_instance = [&](char prefix, std::size_t k, std::size_t count,
                           const std::vector<std::size_t>& concepts,
                           const std::vector<std::vector<double>>& protos,
                           std::size_t d_raw) {
    Instance inst;
    inst.id = detail::zero_padded_id(prefix, k);
    inst.modality = prefix == 't' ? Modality::Text : Modality::Image;
    inst.raw = EmbedMatrixF(count, d_raw);
    inst.concepts = std::vector<std::int64_t>(concepts.begin(),
                                              concepts.end());
    for (std::size_t i = 0; i < count; ++i) {
      auto row = inst.raw.row(i);
      const auto& proto = protos[concepts[i]];
      for (std::size_t d = 0; d < d_raw; ++d) {
        row[d] =
            static_cast<float>(proto[d] + cfg.noise_sigma * rng.normal());
      }
    }
    return inst;
  };

  Corpus corpus;
  corpus.name = "synthetic";
  for (std::size_t p = 0; p < cfg.pairs; ++p) {
    const std::size_t m = rng.uniform_int(cfg.words_lo, cfg.words_hi);
    const std::size_t n = rng.uniform_int(cfg.regions_lo, cfg.regions_hi);
    const std::size_t k = std::min(m, n);

    std::vector<bool> slot_shared(k);
    bool any = false;
    for (std::size_t t = 0; t < k; ++t) {
      slot_shared[t] = rng.uniform() >= cfg.distractor_rate;
      any = any || slot_shared[t];
    }
    if (!any) slot_shared[0] = true;  // a pair must share something

    std::vector<std::size_t> shared;
    std::unordered_set<std::size_t> support;
    for (std::size_t t = 0; t < k; ++t) {
      if (slot_shared[t]) {
        shared.push_back(rng.index(cfg.vocab));
        support.insert(shared.back());
      }
    }

    // Concept layout per side: -1 marks a distractor to be filled in later.
    constexpr std::size_t kDistractor = static_cast<std::size_t>(-1);
    std::vector<std::size_t> txt_concepts, img_concepts;
    std::size_t si = 0;
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t c = slot_shared[t] ? shared[si++] : kDistractor;
      txt_concepts.push_back(c);
      img_concepts.push_back(c);
    }
    for (std::size_t t = k; t < m; ++t) {
      txt_concepts.push_back(rng.uniform() < cfg.distractor_rate
                                 ? kDistractor
                                 : shared[rng.index(shared.size())]);
    }
    for (std::size_t t = k; t < n; ++t) {
      img_concepts.push_back(rng.uniform() < cfg.distractor_rate
                                 ? kDistractor
                                 : shared[rng.index(shared.size())]);
    }

    // Distractors must be absent from the counterpart instance: text draws
    // avoid the shared support, image draws additionally avoid the text
    // distractors.
    std::unordered_set<std::size_t> img_avoid = support;
    for (std::size_t& c : txt_concepts) {
      if (c == kDistractor) {
        c = detail::draw_avoiding(rng, cfg.vocab, support);
        img_avoid.insert(c);
      }
    }
    for (std::size_t& c : img_concepts) {
      if (c == kDistractor) c = detail::draw_avoiding(rng, cfg.vocab, img_avoid);
    }

    rng.shuffle(txt_concepts);
    rng.shuffle(img_concepts);

    corpus.texts.push_back(make_instance('t', p, m, txt_concepts, txt_protos,
                                         cfg.d_raw_txt));
    corpus.images.push_back(make_instance('i', p, n, img_concepts, img_protos,
                                          cfg.d_raw_img));
    corpus.pairs.emplace_back(corpus.texts.back().id,
                              corpus.images.back().id);
  }
  validate_corpus(corpus);
  return corpus;
}

}  // namespace bifocal
