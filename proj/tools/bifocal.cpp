// Command-line front end: generate / train / eval / score / attend.
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bifocal/bifocal.hpp"
#include "bifocal/manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  }
};

json read_json_file(const fs::path& path) {
  if (!fs::exists(path)) {
    throw bifocal::ConfigError("config file not found: " + path.string());
  }
  try {
    const auto bytes = bifocal::io::read_file(path);
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw bifocal::ConfigError(path.string() + ": " + e.what());
  }
}

// Manifests never land inside an output directory (that would perturb the
// artifact itself); they sit next to it, or go to stderr for stdout-only
// commands.
void emit_manifest(const bifocal::RunManifest& man,
                   const std::optional<fs::path>& file) {
  if (file) {
    man.write(*file);
  } else {
    std::cerr << man.to_json().dump(2) << "\n";
  }
}

const bifocal::Instance& find_instance(const bifocal::Corpus& corpus,
                                       const std::string& id) {
  if (auto t = corpus.find_text(id)) return corpus.texts[*t];
  if (auto i = corpus.find_image(id)) return corpus.images[*i];
  throw bifocal::DataError("no instance with id '" + id + "'");
}

template <typename T>
void override_if(const CLI::App& cmd, const std::string& flag, T& dst,
                 const T& src) {
  if (cmd.count(flag) > 0) dst = src;
}

struct GenerateArgs {
  std::string config_path;
  std::string out;
  bifocal::SynthConfig flags;
};

int run_generate(const CLI::App& cmd, const GenerateArgs& args) {
  Timer timer;
  bifocal::SynthConfig cfg;
  if (!args.config_path.empty()) {
    cfg = bifocal::config::synth_from_json(read_json_file(args.config_path));
  }
  override_if(cmd, "--vocab", cfg.vocab, args.flags.vocab);
  override_if(cmd, "--d-raw-txt", cfg.d_raw_txt, args.flags.d_raw_txt);
  override_if(cmd, "--d-raw-img", cfg.d_raw_img, args.flags.d_raw_img);
  override_if(cmd, "--pairs", cfg.pairs, args.flags.pairs);
  override_if(cmd, "--words-lo", cfg.words_lo, args.flags.words_lo);
  override_if(cmd, "--words-hi", cfg.words_hi, args.flags.words_hi);
  override_if(cmd, "--regions-lo", cfg.regions_lo, args.flags.regions_lo);
  override_if(cmd, "--regions-hi", cfg.regions_hi, args.flags.regions_hi);
  override_if(cmd, "--distractor-rate", cfg.distractor_rate,
              args.flags.distractor_rate);
  override_if(cmd, "--noise-sigma", cfg.noise_sigma, args.flags.noise_sigma);
  override_if(cmd, "--seed", cfg.seed, args.flags.seed);
  cfg.validate();

  const bifocal::Corpus corpus = bifocal::generate_corpus(cfg);
  const fs::path out = fs::path(args.out).lexically_normal();
  bifocal::save_corpus(corpus, out);
  std::cerr << "wrote corpus with " << corpus.pairs.size() << " pairs to "
            << out.string() << "\n";

  bifocal::RunManifest man;
  man.command = "generate";
  man.config = bifocal::config::synth_to_json(cfg);
  man.seed = cfg.seed;
  man.outputs["corpus"] = out.string();
  man.duration_seconds = timer.seconds();
  emit_manifest(man, fs::path(out.string() + ".manifest.json"));
  return 0;
}

struct TrainArgs {
  std::string corpus;
  std::string out;
  std::string config_path;
  std::string variant = "prob";
  std::string optimizer = "adam";
  std::size_t dim = 32;
  bool no_bias = false;
  bifocal::TrainConfig train;
  bifocal::FocalConfig focal;
  bifocal::LossConfig loss;
};

int run_train(const CLI::App& cmd, const TrainArgs& args) {
  Timer timer;
  bifocal::TrainConfig train_cfg;
  bifocal::FocalConfig focal_cfg;
  bifocal::LossConfig loss_cfg;
  if (!args.config_path.empty()) {
    const json doc = read_json_file(args.config_path);
    bifocal::config::detail::reject_unknown_keys(
        doc, {"train", "focal", "loss"}, "train config file");
    if (doc.contains("train")) {
      train_cfg = bifocal::config::train_from_json(doc.at("train"));
    }
    if (doc.contains("focal")) {
      focal_cfg = bifocal::config::focal_from_json(doc.at("focal"));
    }
    if (doc.contains("loss")) {
      loss_cfg = bifocal::config::loss_from_json(doc.at("loss"));
    }
  }
  override_if(cmd, "--lr", train_cfg.learning_rate,
              args.train.learning_rate);
  override_if(cmd, "--batch-size", train_cfg.batch_size,
              args.train.batch_size);
  override_if(cmd, "--epochs", train_cfg.epochs, args.train.epochs);
  override_if(cmd, "--lr-decay", train_cfg.lr_decay, args.train.lr_decay);
  override_if(cmd, "--seed", train_cfg.seed, args.train.seed);
  if (cmd.count("--optimizer")) {
    train_cfg.optimizer = bifocal::parse_optimizer(args.optimizer);
  }
  if (cmd.count("--variant")) {
    focal_cfg.variant = bifocal::parse_variant(args.variant);
  }
  override_if(cmd, "--scale", focal_cfg.scale, args.focal.scale);
  override_if(cmd, "--eps", focal_cfg.eps, args.focal.eps);
  override_if(cmd, "--margin", loss_cfg.margin, args.loss.margin);
  train_cfg.validate();
  focal_cfg.validate();
  loss_cfg.validate();

  const bifocal::Corpus corpus = bifocal::load_corpus(args.corpus);
  bifocal::ProjectionModel model = bifocal::init_model(
      args.dim, corpus.texts.front().raw.dim, corpus.images.front().raw.dim,
      !args.no_bias, focal_cfg.variant, train_cfg.seed);
  const std::vector<double> losses =
      bifocal::train(model, corpus, train_cfg, focal_cfg, loss_cfg);
  for (std::size_t e = 0; e < losses.size(); ++e) {
    std::cerr << "epoch " << e << " mean_loss " << losses[e] << "\n";
  }

  const fs::path out(args.out);
  bifocal::save_checkpoint(model, out);
  const fs::path loss_path(out.string() + ".losses.json");
  bifocal::io::write_file(loss_path,
                          json{{"epoch_mean_loss", losses}}.dump(2) + "\n");

  bifocal::RunManifest man;
  man.command = "train";
  man.config = {{"train", bifocal::config::train_to_json(train_cfg)},
                {"focal", bifocal::config::focal_to_json(focal_cfg)},
                {"loss", bifocal::config::loss_to_json(loss_cfg)},
                {"dim", args.dim},
                {"use_bias", !args.no_bias}};
  man.seed = train_cfg.seed;
  man.inputs["corpus"] = args.corpus;
  man.outputs["checkpoint"] = out.string();
  man.outputs["losses"] = loss_path.string();
  man.duration_seconds = timer.seconds();
  emit_manifest(man, fs::path(out.string() + ".manifest.json"));
  return 0;
}

struct EvalArgs {
  std::string corpus;
  std::string checkpoint;
  std::string variant;  // empty = use the checkpoint's variant
  std::string direction = "both";
  std::string out;
  double scale = 20.0;
  std::vector<std::size_t> ks{1, 5};
};

bool corpus_fully_labelled(const bifocal::Corpus& corpus) {
  for (const auto* side : {&corpus.texts, &corpus.images}) {
    for (const auto& inst : *side) {
      if (!inst.concepts) return false;
    }
  }
  return true;
}

int run_eval(const CLI::App& cmd, const EvalArgs& args) {
  Timer timer;
  const bifocal::Corpus corpus = bifocal::load_corpus(args.corpus);
  const bifocal::ProjectionModel model =
      bifocal::load_checkpoint(args.checkpoint);
  const bifocal::ScoreMode mode = bifocal::parse_score_mode(args.direction);

  bifocal::FocalConfig focal;
  focal.variant = model.variant;
  override_if(cmd, "--scale", focal.scale, args.scale);
  std::string variant = args.variant.empty()
                            ? bifocal::variant_name(model.variant)
                            : args.variant;

  bifocal::ScoreMatrix scores;
  if (variant == "ensemble") {
    bifocal::FocalConfig eq = focal, pr = focal;
    eq.variant = bifocal::Variant::Equal;
    pr.variant = bifocal::Variant::Prob;
    scores = bifocal::ensemble_scores(
        bifocal::model_score_matrix(model, corpus, eq, mode),
        bifocal::model_score_matrix(model, corpus, pr, mode));
  } else {
    focal.variant = bifocal::parse_variant(variant);
    scores = bifocal::model_score_matrix(model, corpus, focal, mode);
  }
  const bifocal::RetrievalMetrics metrics =
      bifocal::metrics_from_scores(scores, bifocal::corpus_links(corpus),
                                   args.ks);

  // One object per metric, plus a flat text mirror on stdout.
  json report = json::array();
  auto put = [&report](const std::string& name, double value) {
    report.push_back({{"metric", name}, {"value", value}});
    std::cout << name << " = " << value << "\n";
  };
  for (const auto& [k, v] : metrics.t2i_recall) {
    put("recall@" + std::to_string(k) + "_t2i", v);
  }
  for (const auto& [k, v] : metrics.i2t_recall) {
    put("recall@" + std::to_string(k) + "_i2t", v);
  }
  put("rmean_t2i", metrics.t2i_rmean);
  put("rmean_i2t", metrics.i2t_rmean);
  put("rsum", metrics.rsum);
  if (variant != "ensemble" && corpus_fully_labelled(corpus)) {
    const bifocal::MaskQuality q =
        bifocal::corpus_mask_quality(model, corpus, focal);
    put("mask_precision", q.precision);
    put("mask_recall", q.recall);
    put("irrelevant_mass_pre", q.irrelevant_mass_pre);
    put("irrelevant_mass_post", q.irrelevant_mass_post);
  }

  bifocal::RunManifest man;
  man.command = "eval";
  man.config = {{"variant", variant},
                {"direction", args.direction},
                {"ks", args.ks},
                {"scale", focal.scale}};
  man.seed = model.seed;
  man.inputs["corpus"] = args.corpus;
  man.inputs["checkpoint"] = args.checkpoint;
  man.duration_seconds = timer.seconds();
  if (!args.out.empty()) {
    bifocal::io::write_file(args.out, report.dump(2) + "\n");
    man.outputs["report"] = args.out;
    emit_manifest(man, fs::path(args.out + ".manifest.json"));
  } else {
    emit_manifest(man, std::nullopt);
  }
  return 0;
}

struct PairArgs {
  std::string corpus;
  std::string checkpoint;
  std::string text_id;
  std::string image_id;
  std::string variant;  // empty = checkpoint's
  std::string direction = "t2i";
  std::string out;
  double scale = 20.0;
};

bifocal::FocalConfig pair_focal_config(const CLI::App& cmd,
                                       const PairArgs& args,
                                       const bifocal::ProjectionModel& model) {
  bifocal::FocalConfig focal;
  focal.variant = args.variant.empty() ? model.variant
                                       : bifocal::parse_variant(args.variant);
  override_if(cmd, "--scale", focal.scale, args.scale);
  return focal;
}

int run_score(const CLI::App& cmd, const PairArgs& args) {
  Timer timer;
  const bifocal::Corpus corpus = bifocal::load_corpus(args.corpus);
  const bifocal::ProjectionModel model =
      bifocal::load_checkpoint(args.checkpoint);
  const bifocal::FocalConfig focal = pair_focal_config(cmd, args, model);
  const bifocal::Instance& text = find_instance(corpus, args.text_id);
  const bifocal::Instance& image = find_instance(corpus, args.image_id);
  if (text.modality != bifocal::Modality::Text) {
    throw bifocal::DataError("'" + args.text_id + "' is not a text instance");
  }
  if (image.modality != bifocal::Modality::Image) {
    throw bifocal::DataError("'" + args.image_id +
                             "' is not an image instance");
  }
  const bifocal::PairScore score = bifocal::pair_score(
      bifocal::project(model, text), bifocal::project(model, image), focal);
  std::cout << json{{"text", text.id},
                    {"image", image.id},
                    {"variant", bifocal::variant_name(focal.variant)},
                    {"t2i", score.t2i},
                    {"i2t", score.i2t},
                    {"total", score.total}}
                   .dump(2)
            << "\n";

  bifocal::RunManifest man;
  man.command = "score";
  man.config = {{"variant", bifocal::variant_name(focal.variant)},
                {"scale", focal.scale},
                {"text", text.id},
                {"image", image.id}};
  man.seed = model.seed;
  man.inputs["corpus"] = args.corpus;
  man.inputs["checkpoint"] = args.checkpoint;
  man.duration_seconds = timer.seconds();
  emit_manifest(man, std::nullopt);
  return 0;
}

int run_attend(const CLI::App& cmd, const PairArgs& args) {
  Timer timer;
  const bifocal::Corpus corpus = bifocal::load_corpus(args.corpus);
  const bifocal::ProjectionModel model =
      bifocal::load_checkpoint(args.checkpoint);
  const bifocal::FocalConfig focal = pair_focal_config(cmd, args, model);
  const bifocal::Instance& text = find_instance(corpus, args.text_id);
  const bifocal::Instance& image = find_instance(corpus, args.image_id);
  if (args.direction != "t2i" && args.direction != "i2t") {
    throw bifocal::ConfigError("direction must be t2i or i2t");
  }
  const bifocal::EmbedMatrixD t = bifocal::project(model, text);
  const bifocal::EmbedMatrixD v = bifocal::project(model, image);
  const bool t2i = args.direction == "t2i";
  const bifocal::FocalResult res = t2i ? bifocal::focal_attend(t, v, focal)
                                       : bifocal::focal_attend(v, t, focal);

  json queries = json::array();
  const std::size_t n = res.preassigned.candidates;
  for (std::size_t i = 0; i < res.preassigned.queries; ++i) {
    json q;
    q["preassigned"] = std::vector<double>(res.preassigned.row(i).begin(),
                                           res.preassigned.row(i).end());
    q["scores"] = std::vector<double>(res.scores.values.begin() + i * n,
                                      res.scores.values.begin() + (i + 1) * n);
    q["mask"] = std::vector<int>(res.mask.row(i).begin(),
                                 res.mask.row(i).end());
    q["reassigned"] = std::vector<double>(res.reassigned.row(i).begin(),
                                          res.reassigned.row(i).end());
    queries.push_back(std::move(q));
  }
  const json dump = {{"text", text.id},
                     {"image", image.id},
                     {"direction", args.direction},
                     {"variant", bifocal::variant_name(focal.variant)},
                     {"scale", focal.scale},
                     {"queries", queries}};

  bifocal::RunManifest man;
  man.command = "attend";
  man.config = {{"variant", bifocal::variant_name(focal.variant)},
                {"scale", focal.scale},
                {"text", text.id},
                {"image", image.id},
                {"direction", args.direction}};
  man.seed = model.seed;
  man.inputs["corpus"] = args.corpus;
  man.inputs["checkpoint"] = args.checkpoint;
  man.duration_seconds = timer.seconds();
  if (!args.out.empty()) {
    bifocal::io::write_file(args.out, dump.dump(2) + "\n");
    man.outputs["dump"] = args.out;
    emit_manifest(man, fs::path(args.out + ".manifest.json"));
  } else {
    std::cout << dump.dump(2) << "\n";
    emit_manifest(man, std::nullopt);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bidirectional focal attention for fragment-level "
               "image-text matching"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cgen = app.add_subcommand(
      "generate", "generate a synthetic labelled corpus");
  cgen->add_option("--config", gen.config_path, "JSON config file");
  cgen->add_option("--out", gen.out, "output corpus directory")->required();
  cgen->add_option("--vocab", gen.flags.vocab, "number of latent concepts")
      ->capture_default_str();
  cgen->add_option("--d-raw-txt", gen.flags.d_raw_txt,
                   "raw text fragment dimension")
      ->capture_default_str();
  cgen->add_option("--d-raw-img", gen.flags.d_raw_img,
                   "raw image fragment dimension")
      ->capture_default_str();
  cgen->add_option("--pairs", gen.flags.pairs, "number of text-image pairs")
      ->capture_default_str();
  cgen->add_option("--words-lo", gen.flags.words_lo,
                   "min fragments per text")
      ->capture_default_str();
  cgen->add_option("--words-hi", gen.flags.words_hi,
                   "max fragments per text")
      ->capture_default_str();
  cgen->add_option("--regions-lo", gen.flags.regions_lo,
                   "min fragments per image")
      ->capture_default_str();
  cgen->add_option("--regions-hi", gen.flags.regions_hi,
                   "max fragments per image")
      ->capture_default_str();
  cgen->add_option("--distractor-rate", gen.flags.distractor_rate,
                   "chance a fragment is irrelevant to its pair")
      ->capture_default_str();
  cgen->add_option("--noise-sigma", gen.flags.noise_sigma,
                   "per-dimension noise scale")
      ->capture_default_str();
  cgen->add_option("--seed", gen.flags.seed, "generator seed")
      ->capture_default_str();

  TrainArgs tr;
  CLI::App* ctrain =
      app.add_subcommand("train", "train a projection model checkpoint");
  ctrain->add_option("--corpus", tr.corpus, "corpus directory")->required();
  ctrain->add_option("--out", tr.out, "checkpoint output path")->required();
  ctrain->add_option("--config", tr.config_path,
                     "JSON config file with train/focal/loss sections");
  ctrain->add_option("--variant", tr.variant, "plain|equal|prob")
      ->capture_default_str();
  ctrain->add_option("--dim", tr.dim, "projected embedding dimension")
      ->capture_default_str();
  ctrain->add_option("--lr", tr.train.learning_rate, "learning rate")
      ->capture_default_str();
  ctrain->add_option("--batch-size", tr.train.batch_size, "mini-batch size")
      ->capture_default_str();
  ctrain->add_option("--epochs", tr.train.epochs, "training epochs")
      ->capture_default_str();
  ctrain->add_option("--lr-decay", tr.train.lr_decay,
                     "learning-rate factor applied every 10 epochs")
      ->capture_default_str();
  ctrain->add_option("--seed", tr.train.seed, "training seed")
      ->capture_default_str();
  ctrain->add_option("--optimizer", tr.optimizer, "sgd|adam")
      ->capture_default_str();
  ctrain->add_option("--scale", tr.focal.scale, "attention softmax scale")
      ->capture_default_str();
  ctrain->add_option("--eps", tr.focal.eps, "renormalization guard")
      ->capture_default_str();
  ctrain->add_option("--margin", tr.loss.margin, "triplet margin")
      ->capture_default_str();
  ctrain->add_flag("--no-bias", tr.no_bias, "projection without bias terms");

  EvalArgs ev;
  CLI::App* ceval =
      app.add_subcommand("eval", "retrieval metrics for a checkpoint");
  ceval->add_option("--corpus", ev.corpus, "corpus directory")->required();
  ceval->add_option("--checkpoint", ev.checkpoint, "model checkpoint")
      ->required();
  ceval->add_option("--variant", ev.variant,
                    "plain|equal|prob|ensemble (default: checkpoint's)");
  ceval->add_option("--direction", ev.direction,
                    "score definition: both|t2i|i2t")
      ->capture_default_str();
  ceval->add_option("--scale", ev.scale, "attention softmax scale")
      ->capture_default_str();
  ceval->add_option("--k", ev.ks, "recall cutoffs")->capture_default_str();
  ceval->add_option("--out", ev.out, "write JSON report here");

  PairArgs sc;
  CLI::App* cscore =
      app.add_subcommand("score", "score one text-image pair");
  cscore->add_option("--corpus", sc.corpus, "corpus directory")->required();
  cscore->add_option("--checkpoint", sc.checkpoint, "model checkpoint")
      ->required();
  cscore->add_option("--text", sc.text_id, "text instance id")->required();
  cscore->add_option("--image", sc.image_id, "image instance id")->required();
  cscore->add_option("--variant", sc.variant,
                     "plain|equal|prob (default: checkpoint's)");
  cscore->add_option("--scale", sc.scale, "attention softmax scale")
      ->capture_default_str();

  PairArgs at;
  CLI::App* cattend = app.add_subcommand(
      "attend", "dump per-fragment attention for one pair");
  cattend->add_option("--corpus", at.corpus, "corpus directory")->required();
  cattend->add_option("--checkpoint", at.checkpoint, "model checkpoint")
      ->required();
  cattend->add_option("--text", at.text_id, "text instance id")->required();
  cattend->add_option("--image", at.image_id, "image instance id")
      ->required();
  cattend->add_option("--variant", at.variant,
                      "plain|equal|prob (default: checkpoint's)");
  cattend->add_option("--direction", at.direction, "t2i|i2t")
      ->capture_default_str();
  cattend->add_option("--scale", at.scale, "attention softmax scale")
      ->capture_default_str();
  cattend->add_option("--out", at.out, "write the dump here (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cgen->parsed()) return run_generate(*cgen, gen);
    if (ctrain->parsed()) return run_train(*ctrain, tr);
    if (ceval->parsed()) return run_eval(*ceval, ev);
    if (cscore->parsed()) return run_score(*cscore, sc);
    if (cattend->parsed()) return run_attend(*cattend, at);
  } catch (const bifocal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const bifocal::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const bifocal::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
