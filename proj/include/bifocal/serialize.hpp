#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bifocal/attention.hpp"
#include "bifocal/errors.hpp"
#include "bifocal/synthdata.hpp"
#include "bifocal/training.hpp"

namespace bifocal::config {

namespace detail {

// Config documents mirror the config structs field-for-field; a key that
// maps to nothing is a config error, not a silent ignore.
inline void reject_unknown_keys(const nlohmann::json& j,
                                const std::vector<std::string>& allowed,
                                const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(what + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read_into(const nlohmann::json& j, const char* key, T& out,
               const std::string& what) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(what + ": bad value for '" + key + "'");
  }
}

}  // namespace detail

inline FocalConfig focal_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(j, {"variant", "scale", "eps"}, "focal config");
  FocalConfig cfg;
  if (j.contains("variant")) {
    cfg.variant = parse_variant(j.at("variant").get<std::string>());
  }
  detail::read_into(j, "scale", cfg.scale, "focal config");
  detail::read_into(j, "eps", cfg.eps, "focal config");
  cfg.validate();
  return cfg;
}

inline nlohmann::json focal_to_json(const FocalConfig& cfg) {
  return {{"variant", variant_name(cfg.variant)},
          {"scale", cfg.scale},
          {"eps", cfg.eps}};
}

inline LossConfig loss_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(j, {"margin"}, "loss config");
  LossConfig cfg;
  detail::read_into(j, "margin", cfg.margin, "loss config");
  cfg.validate();
  return cfg;
}

inline nlohmann::json loss_to_json(const LossConfig& cfg) {
  return {{"margin", cfg.margin}};
}

inline TrainConfig train_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(j,
                              {"learning_rate", "batch_size", "epochs",
                               "lr_decay", "seed", "optimizer"},
                              "train config");
  TrainConfig cfg;
  detail::read_into(j, "learning_rate", cfg.learning_rate, "train config");
  detail::read_into(j, "batch_size", cfg.batch_size, "train config");
  detail::read_into(j, "epochs", cfg.epochs, "train config");
  detail::read_into(j, "lr_decay", cfg.lr_decay, "train config");
  detail::read_into(j, "seed", cfg.seed, "train config");
  if (j.contains("optimizer")) {
    cfg.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json train_to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"lr_decay", cfg.lr_decay},
          {"seed", cfg.seed},
          {"optimizer", optimizer_name(cfg.optimizer)}};
}

inline SynthConfig synth_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j,
      {"vocab", "d_raw_txt", "d_raw_img", "pairs", "words_lo", "words_hi",
       "regions_lo", "regions_hi", "distractor_rate", "noise_sigma", "seed"},
      "synth config");
  SynthConfig cfg;
  detail::read_into(j, "vocab", cfg.vocab, "synth config");
  detail::read_into(j, "d_raw_txt", cfg.d_raw_txt, "synth config");
  detail::read_into(j, "d_raw_img", cfg.d_raw_img, "synth config");
  detail::read_into(j, "pairs", cfg.pairs, "synth config");
  detail::read_into(j, "words_lo", cfg.words_lo, "synth config");
  detail::read_into(j, "words_hi", cfg.words_hi, "synth config");
  detail::read_into(j, "regions_lo", cfg.regions_lo, "synth config");
  detail::read_into(j, "regions_hi", cfg.regions_hi, "synth config");
  detail::read_into(j, "distractor_rate", cfg.distractor_rate, "synth config");
  detail::read_into(j, "noise_sigma", cfg.noise_sigma, "synth config");
  detail::read_into(j, "seed", cfg.seed, "synth config");
  cfg.validate();
  return cfg;
}

inline nlohmann::json synth_to_json(const SynthConfig& cfg) {
  return {{"vocab", cfg.vocab},
          {"d_raw_txt", cfg.d_raw_txt},
          {"d_raw_img", cfg.d_raw_img},
          {"pairs", cfg.pairs},
          {"words_lo", cfg.words_lo},
          {"words_hi", cfg.words_hi},
          {"regions_lo", cfg.regions_lo},
          {"regions_hi", cfg.regions_hi},
          {"distractor_rate", cfg.distractor_rate},
          {"noise_sigma", cfg.noise_sigma},
          {"seed", cfg.seed}};
}

}  // namespace bifocal::config
