#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bifocal/binio.hpp"
#include "bifocal/errors.hpp"
#include "bifocal/matrix.hpp"

namespace bifocal {

enum class Modality { Text, Image };

inline const char* modality_name(Modality m) {
  return m == Modality::Text ? "text" : "image";
}

// One text or image: raw per-fragment features plus, for synthetic corpora,
// the latent concept label behind each fragment.
struct Instance {
  std::string id;
  Modality modality = Modality::Text;
  EmbedMatrixF raw;
  std::optional<std::vector<std::int64_t>> concepts;

  bool operator==(const Instance&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<Instance> texts;
  std::vector<Instance> images;
  std::vector<std::pair<std::string, std::string>> pairs;  // (text_id, image_id)

  bool operator==(const Corpus&) const = default;

  std::optional<std::size_t> find_text(const std::string& id) const {
    for (std::size_t i = 0; i < texts.size(); ++i)
      if (texts[i].id == id) return i;
    return std::nullopt;
  }
  std::optional<std::size_t> find_image(const std::string& id) const {
    for (std::size_t i = 0; i < images.size(); ++i)
      if (images[i].id == id) return i;
    return std::nullopt;
  }
};

inline void validate_instance(const Instance& inst) {
  validate_matrix(inst.raw, "instance " + inst.id);
  if (inst.concepts && inst.concepts->size() != inst.raw.rows) {
    throw DataError("instance " + inst.id + ": " +
                    std::to_string(inst.concepts->size()) +
                    " concept labels for " + std::to_string(inst.raw.rows) +
                    " fragments");
  }
}

inline void validate_corpus(const Corpus& corpus) {
  if (corpus.texts.empty() || corpus.images.empty()) {
    throw DataError("corpus must contain at least one text and one image");
  }
  std::unordered_set<std::string> ids;
  for (const auto* side : {&corpus.texts, &corpus.images}) {
    for (const Instance& inst : *side) {
      validate_instance(inst);
      if (!ids.insert(inst.id).second) {
        throw DataError("duplicate instance id " + inst.id);
      }
    }
  }
  std::unordered_set<std::string> linked;
  for (const auto& [tid, iid] : corpus.pairs) {
    if (!corpus.find_text(tid)) {
      throw DataError("pair references unknown text id " + tid);
    }
    if (!corpus.find_image(iid)) {
      throw DataError("pair references unknown image id " + iid);
    }
    linked.insert(tid);
    linked.insert(iid);
  }
  for (const auto* side : {&corpus.texts, &corpus.images}) {
    for (const Instance& inst : *side) {
      if (!linked.count(inst.id)) {
        throw DataError("instance " + inst.id + " appears in no pair");
      }
    }
  }
}

// Directory format: meta.json describing every instance plus embeddings.bin,
// the concatenation of all matrices as row-major little-endian f32 at the
// byte offsets declared in the metadata, texts first, no padding.
inline void save_corpus(const Corpus& corpus,
                        const std::filesystem::path& dir) {
  validate_corpus(corpus);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string());

  std::vector<std::uint8_t> blob;
  nlohmann::json instances = nlohmann::json::array();
  for (const auto* side : {&corpus.texts, &corpus.images}) {
    for (const Instance& inst : *side) {
      nlohmann::json rec;
      rec["id"] = inst.id;
      rec["modality"] = modality_name(inst.modality);
      rec["rows"] = inst.raw.rows;
      rec["dim"] = inst.raw.dim;
      rec["byte_offset"] = blob.size();
      if (inst.concepts) rec["concepts"] = *inst.concepts;
      instances.push_back(std::move(rec));
      for (float v : inst.raw.values) io::put_f32(blob, v);
    }
  }
  nlohmann::json meta;
  meta["name"] = corpus.name;
  meta["instances"] = std::move(instances);
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [tid, iid] : corpus.pairs) {
    pairs.push_back(nlohmann::json::array({tid, iid}));
  }
  meta["pairs"] = std::move(pairs);

  io::write_file(dir / "embeddings.bin", blob);
  io::write_file(dir / "meta.json", meta.dump(2) + "\n");
}

inline Corpus load_corpus(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  const auto blob_path = dir / "embeddings.bin";
  if (!std::filesystem::exists(meta_path)) {
    throw DataError("missing " + meta_path.string());
  }
  if (!std::filesystem::exists(blob_path)) {
    throw DataError("missing " + blob_path.string());
  }

  nlohmann::json meta;
  try {
    const auto bytes = io::read_file(meta_path);
    meta = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(meta_path.string() + ": " + e.what());
  }
  const auto blob = io::read_file(blob_path);

  Corpus corpus;
  std::size_t declared_bytes = 0;
  try {
    corpus.name = meta.at("name").get<std::string>();
    for (const auto& rec : meta.at("instances")) {
      Instance inst;
      inst.id = rec.at("id").get<std::string>();
      const auto modality = rec.at("modality").get<std::string>();
      if (modality == "text") {
        inst.modality = Modality::Text;
      } else if (modality == "image") {
        inst.modality = Modality::Image;
      } else {
        throw DataError("instance " + inst.id + ": unknown modality '" +
                        modality + "'");
      }
      const auto rows = rec.at("rows").get<std::size_t>();
      const auto dim = rec.at("dim").get<std::size_t>();
      const auto offset = rec.at("byte_offset").get<std::size_t>();
      const std::size_t count = rows * dim;
      if (offset + count * 4 > blob.size()) {
        throw DataError("instance " + inst.id +
                        ": embedding blob too short for declared shape");
      }
      inst.raw.rows = rows;
      inst.raw.dim = dim;
      inst.raw.values.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        std::uint32_t u = 0;
        for (int b = 3; b >= 0; --b) u = (u << 8) | blob[offset + k * 4 + b];
        inst.raw.values[k] = std::bit_cast<float>(u);
      }
      declared_bytes += count * 4;
      if (rec.contains("concepts")) {
        inst.concepts = rec.at("concepts").get<std::vector<std::int64_t>>();
      }
      (inst.modality == Modality::Text ? corpus.texts : corpus.images)
          .push_back(std::move(inst));
    }
    for (const auto& p : meta.at("pairs")) {
      corpus.pairs.emplace_back(p.at(0).get<std::string>(),
                                p.at(1).get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(meta_path.string() + ": " + e.what());
  }
  if (declared_bytes != blob.size()) {
    throw DataError(blob_path.string() + ": file size " +
                    std::to_string(blob.size()) + " does not match " +
                    std::to_string(declared_bytes) + " declared bytes");
  }
  validate_corpus(corpus);
  return corpus;
}

}  // namespace bifocal
