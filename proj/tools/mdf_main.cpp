// mdf: dataset building, stain normalization, diffusion training/sampling,
// embedding, evaluation, and survey analysis from one binary.
//
// Exit codes: 0 success, 2 usage/validation, 3 runtime/numeric failure.
// Machine-readable JSON goes to stdout, human logs to stderr.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mdf/checkpoint.hpp"
#include "mdf/config.hpp"
#include "mdf/diffusion.hpp"
#include "mdf/errors.hpp"
#include "mdf/f32io.hpp"
#include "mdf/image.hpp"
#include "mdf/metrics.hpp"
#include "mdf/patch.hpp"
#include "mdf/stain.hpp"
#include "mdf/toy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::uint64_t seed = 1;
  bool seed_explicit = false;
  std::string config_path;
};

mdf::RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return mdf::RunConfig{};
  return mdf::load_run_config(path);
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw mdf::IoError("cannot write report: " + out_path);
    out << j.dump(2) << "\n";
  }
}

std::vector<mdf::Annotation> load_annotations(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw mdf::ValidationError("cannot open annotations: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw mdf::ValidationError("annotations parse error: " + std::string(ex.what()));
  }
  if (!j.is_array()) throw mdf::ValidationError("annotations: expected a JSON array");
  std::vector<mdf::Annotation> out;
  for (const auto& item : j) {
    mdf::Annotation ann;
    try {
      ann.slide_id = item.at("slide_id").get<std::string>();
      ann.label = item.at("label").get<std::string>();
      for (const auto& poly : item.at("polygons")) {
        std::vector<std::array<double, 2>> vertices;
        for (const auto& v : poly)
          vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        ann.polygons.push_back(std::move(vertices));
      }
    } catch (const json::exception& ex) {
      throw mdf::ValidationError("annotations: bad entry: " + std::string(ex.what()));
    }
    out.push_back(std::move(ann));
  }
  return out;
}

// ---------------------------------------------------------------------------
// make-dataset

int cmd_make_dataset(const CommonArgs& common, const std::string& slides_dir,
                     const std::string& annotations_path, const std::string& out_dir,
                     const std::string& manifest_path) {
  if (!fs::exists(slides_dir)) throw mdf::ValidationError("slides dir not found: " + slides_dir);
  if (!fs::exists(annotations_path))
    throw mdf::ValidationError("annotations file not found: " + annotations_path);

  mdf::RunConfig cfg = load_config_or_default(common.config_path);
  mdf::TileSpec spec;
  spec.patch_size = cfg.data.patch;
  spec.stride = cfg.data.stride;
  spec.resize_to = cfg.data.resize;
  spec.max_per_slide = cfg.data.max_per_slide;
  spec.coverage_threshold = cfg.data.coverage;

  auto annotations = load_annotations(annotations_path);
  fs::create_directories(out_dir);

  mdf::Rng master(common.seed);
  std::vector<mdf::ManifestEntry> entries;
  std::map<std::string, std::size_t> per_label;
  for (const std::string& l : cfg.data.labels) per_label[l] = 0;

  for (const mdf::Annotation& ann : annotations) {
    if (!per_label.contains(ann.label))
      throw mdf::ValidationError("annotation label '" + ann.label +
                                 "' not in configured label set");
    fs::path slide_path = fs::path(slides_dir) / (ann.slide_id + ".ppm");
    if (!fs::exists(slide_path))
      throw mdf::ValidationError("slide image not found: " + slide_path.string());
    mdf::RgbImage slide = mdf::read_ppm(slide_path);

    // Per-slide substream: insensitive to slide processing order.
    mdf::Rng slide_rng = master.fork(mdf::fnv1a64(ann.slide_id));
    auto patches = mdf::extract_patches(slide, ann, spec, slide_rng);

    for (const auto& patch : patches) {
      fs::path out_path = fs::path(out_dir) / (ann.slide_id + "_" + std::to_string(patch.y) +
                                               "_" + std::to_string(patch.x) + ".ppm");
      mdf::write_ppm(patch.image, out_path);
      entries.push_back({out_path.string(), patch.label, ann.slide_id, patch.x, patch.y});
      ++per_label[patch.label];
    }
    std::cerr << ann.slide_id << ": " << patches.size() << " patches\n";
  }

  mdf::write_manifest(entries, manifest_path);

  // Per-label counts table, one column per label plus the total.
  std::cerr << "\nLabel    ";
  for (const auto& [label, count] : per_label) std::cerr << label << "  ";
  std::cerr << "Total\nPatches  ";
  for (const auto& [label, count] : per_label)
    std::cerr << count << std::string(label.size() + 1, ' ');
  std::cerr << entries.size() << "\n";

  json report{{"manifest", std::string(manifest_path)},
              {"total", entries.size()},
              {"per_label", per_label}};
  emit(report, "");
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string manifest;
  std::string toy;
  std::string out = "model.mdf";
  std::string loss_log;
  std::optional<int> steps;
  std::optional<int> batch;
  std::optional<double> lr;
  std::optional<std::string> weighting;
  std::optional<double> c;
};

int cmd_train(const CommonArgs& common, const TrainArgs& args) {
  mdf::RunConfig cfg = load_config_or_default(common.config_path);
  if (args.steps) cfg.train.steps = *args.steps;
  if (args.batch) cfg.train.batch = *args.batch;
  if (args.lr) cfg.train.lr = *args.lr;
  if (args.weighting) cfg.loss.weighting = *args.weighting;
  if (args.c) cfg.loss.c = *args.c;
  if (cfg.loss.weighting != "simple" && cfg.loss.weighting != "p2")
    throw mdf::ValidationError("weighting must be 'simple' or 'p2'");

  std::uint64_t seed = common.seed_explicit ? common.seed : cfg.train.seed;

  int input_dim = 0;
  std::vector<std::string> labels;
  mdf::BatchProvider provider;

  std::vector<mdf::Sample> dataset;  // manifest mode storage
  if (!args.toy.empty()) {
    if (args.toy != "two-gaussians")
      throw mdf::ValidationError("unknown toy task: " + args.toy);
    input_dim = 2;
    labels = {"g0", "g1"};
    auto task = std::make_shared<mdf::TwoGaussians>();
    provider = [task](std::size_t n, mdf::Rng& rng) { return task->batch(n, rng); };
  } else if (!args.manifest.empty()) {
    auto entries = mdf::read_manifest(args.manifest);
    if (entries.empty()) throw mdf::ValidationError("manifest is empty");
    labels = cfg.data.labels;
    for (const auto& e : entries) {
      auto it = std::find(labels.begin(), labels.end(), e.label);
      if (it == labels.end())
        throw mdf::ValidationError("manifest label '" + e.label + "' not in label set");
      mdf::RgbImage img = mdf::read_ppm(e.path);
      mdf::Sample smp;
      smp.label = static_cast<int>(it - labels.begin());
      smp.data.resize(img.pixels.size());
      for (std::size_t i = 0; i < img.pixels.size(); ++i)
        smp.data[i] = img.pixels[i] / 127.5 - 1.0;
      if (input_dim == 0) input_dim = static_cast<int>(smp.data.size());
      if (static_cast<int>(smp.data.size()) != input_dim)
        throw mdf::ValidationError("manifest images have mixed dimensions");
      dataset.push_back(std::move(smp));
    }
    provider = [&dataset](std::size_t n, mdf::Rng& rng) {
      std::vector<mdf::Sample> batch;
      batch.reserve(n);
      for (std::size_t i = 0; i < n; ++i)
        batch.push_back(dataset[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(dataset.size()) - 1))]);
      return batch;
    };
  } else {
    throw mdf::ValidationError("train needs --manifest or --toy two-gaussians");
  }

  mdf::NoiseSchedule schedule = mdf::make_linear_schedule(
      cfg.schedule.steps, cfg.schedule.beta_start, cfg.schedule.beta_end);

  mdf::DenoiserConfig model_cfg;
  model_cfg.input_dim = input_dim;
  model_cfg.hidden_dims = cfg.model.hidden_dims;
  model_cfg.embed_dim = cfg.model.embed_dim;
  model_cfg.num_labels = static_cast<int>(labels.size());
  model_cfg.activation =
      cfg.model.activation == "tanh" ? mdf::Activation::tanh : mdf::Activation::silu;

  mdf::Rng rng(seed);
  mdf::DenoiserModel model(model_cfg, rng);

  mdf::LossConfig loss;
  loss.weighting = cfg.loss.weighting == "simple" ? mdf::Weighting::simple : mdf::Weighting::p2;
  loss.c = cfg.loss.c;
  loss.p2 = {cfg.loss.p2_k, cfg.loss.p2_gamma};

  mdf::TrainOptions opts;
  opts.steps = cfg.train.steps;
  opts.batch = cfg.train.batch;
  opts.lr = cfg.train.lr;

  auto log = mdf::train_denoiser(model, schedule, provider, loss, opts, rng);

  if (!args.loss_log.empty()) {
    std::ofstream csv(args.loss_log);
    if (!csv) throw mdf::IoError("cannot write loss log: " + args.loss_log);
    csv << "step,loss,weight_scheme\n";
    for (const auto& entry : log)
      csv << entry.step << "," << entry.loss << "," << cfg.loss.weighting << "\n";
  }

  mdf::Checkpoint ckpt = mdf::make_checkpoint(schedule, loss, labels, model,
                                              cfg.schedule.beta_start, cfg.schedule.beta_end);
  mdf::save_checkpoint(ckpt, args.out);

  json report{{"checkpoint", args.out},
              {"steps", cfg.train.steps},
              {"weighting", cfg.loss.weighting},
              {"final_loss", log.empty() ? json(nullptr) : json(log.back().loss)}};
  emit(report, "");
  return 0;
}

// ---------------------------------------------------------------------------
// sample

int cmd_sample(const CommonArgs& common, const std::string& ckpt_path, const std::string& label,
               int count, const std::string& out, const std::string& mode, int width,
               int height) {
  mdf::Checkpoint ckpt = mdf::load_checkpoint(ckpt_path);
  auto it = std::find(ckpt.labels.begin(), ckpt.labels.end(), label);
  if (it == ckpt.labels.end()) {
    std::string valid;
    for (const auto& l : ckpt.labels) valid += (valid.empty() ? "" : ", ") + l;
    throw mdf::ValidationError("unknown label '" + label + "'; valid labels: " + valid);
  }
  int label_idx = static_cast<int>(it - ckpt.labels.begin());

  mdf::DenoiserModel model = mdf::model_from_checkpoint(ckpt);
  mdf::NoiseSchedule schedule = mdf::schedule_from_checkpoint(ckpt);
  mdf::Rng rng(common.seed);
  auto samples = mdf::sample_chain(mdf::as_eps_fn(model), schedule, label_idx, count,
                                   model.config().input_dim, rng);

  json report{{"count", count}, {"dim", model.config().input_dim}, {"label", label}};
  if (mode == "vector") {
    std::vector<double> flat;
    flat.reserve(samples.size() * samples[0].size());
    for (const auto& s : samples) flat.insert(flat.end(), s.begin(), s.end());
    mdf::write_f32(out, samples.size(), samples[0].size(), flat);
    report["out"] = out;
  } else if (mode == "image") {
    if (width < 1 || height < 1 || 3 * width * height != model.config().input_dim)
      throw mdf::ValidationError("image mode needs --width and --height with 3*w*h == " +
                                 std::to_string(model.config().input_dim));
    std::vector<std::string> files;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      mdf::RgbImage img(width, height);
      for (std::size_t p = 0; p < img.pixels.size(); ++p) {
        double v = (samples[i][p] + 1.0) * 127.5;
        img.pixels[p] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
      std::string name = out + "_" + std::to_string(i) + ".ppm";
      mdf::write_ppm(img, name);
      files.push_back(name);
    }
    report["out"] = files;
  } else {
    throw mdf::ValidationError("mode must be 'vector' or 'image'");
  }
  emit(report, "");
  return 0;
}

// ---------------------------------------------------------------------------
// embed

int cmd_embed(const CommonArgs& common, const std::vector<std::string>& images,
              const std::string& manifest, const std::string& extractor_name, int proj_dim,
              const std::string& space, const std::string& out) {
  std::vector<mdf::RgbImage> imgs;
  if (!manifest.empty()) {
    for (const auto& e : mdf::read_manifest(manifest)) imgs.push_back(mdf::read_ppm(e.path));
  }
  for (const auto& p : images) imgs.push_back(mdf::read_ppm(p));
  if (imgs.empty()) throw mdf::ValidationError("embed needs --images or --manifest");

  mdf::FeatureExtractor extractor;
  if (extractor_name == "identity") {
    extractor = mdf::FeatureExtractor::identity;
  } else if (extractor_name == "random-projection") {
    extractor = mdf::FeatureExtractor::random_projection;
  } else if (extractor_name == "histogram") {
    extractor = mdf::FeatureExtractor::histogram;
  } else {
    throw mdf::ValidationError("unknown extractor: " + extractor_name);
  }

  mdf::FeatureSet f = mdf::extract_features(imgs, extractor, common.seed, proj_dim, space);
  mdf::write_f32(out, f.rows, f.cols, f.values);
  emit(json{{"rows", f.rows}, {"cols", f.cols}, {"space", space}, {"out", out}}, "");
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

int cmd_evaluate(const std::string& real_path, const std::string& gen_path,
                 const std::string& real_spatial, const std::string& gen_spatial,
                 const std::string& probs_path, int k, bool zscore, const std::string& out) {
  mdf::FeatureSet real_f = mdf::to_feature_set(mdf::read_f32(real_path), "final");
  mdf::FeatureSet gen_f = mdf::to_feature_set(mdf::read_f32(gen_path), "final");
  if (real_f.cols != gen_f.cols)
    throw mdf::ValidationError("real and generated feature dimensions differ");

  if (zscore) {
    // Standardize both sets with the real set's statistics.
    mdf::GaussianStats st = mdf::gaussian_stats(real_f);
    for (std::size_t c = 0; c < real_f.cols; ++c) {
      double sd = std::sqrt(std::max(st.covariance[c * real_f.cols + c], 1e-12));
      for (std::size_t r = 0; r < real_f.rows; ++r)
        real_f.values[r * real_f.cols + c] = (real_f.at(r, c) - st.mean[c]) / sd;
      for (std::size_t r = 0; r < gen_f.rows; ++r)
        gen_f.values[r * gen_f.cols + c] = (gen_f.at(r, c) - st.mean[c]) / sd;
    }
  }

  json report;
  report["n_real"] = real_f.rows;
  report["n_gen"] = gen_f.rows;
  report["k"] = k;
  report["fid"] = mdf::fid(mdf::gaussian_stats(real_f), mdf::gaussian_stats(gen_f));
  report["precision"] = mdf::improved_precision(real_f, gen_f, k);
  report["recall"] = mdf::improved_recall(real_f, gen_f, k);

  if (!real_spatial.empty() || !gen_spatial.empty()) {
    if (real_spatial.empty() || gen_spatial.empty())
      throw mdf::ValidationError("sfid needs both --real-spatial and --gen-spatial");
    mdf::FeatureSet rs = mdf::to_feature_set(mdf::read_f32(real_spatial), "spatial");
    mdf::FeatureSet gs = mdf::to_feature_set(mdf::read_f32(gen_spatial), "spatial");
    report["sfid"] = mdf::sfid(rs, gs);
  } else {
    report["sfid"] = nullptr;
  }

  if (!probs_path.empty()) {
    report["is"] = mdf::inception_score(mdf::to_prob_table(mdf::read_f32(probs_path)));
  } else {
    report["is"] = nullptr;
  }

  emit(report, out);
  return 0;
}

// ---------------------------------------------------------------------------
// stain-normalize

int cmd_stain_normalize(const CommonArgs& common, const std::string& input,
                        const std::string& target, const std::string& out, double lambda,
                        int iters, const std::string& source_model_path,
                        const std::string& target_model_path,
                        const std::string& save_source_model,
                        const std::string& save_target_model) {
  mdf::RgbImage src = mdf::read_ppm(input);

  mdf::StainFitOptions opts;
  opts.lambda = lambda;
  opts.iterations = iters;

  mdf::Rng rng(common.seed);
  mdf::StainModel src_model, tgt_model;
  if (!source_model_path.empty()) {
    src_model = mdf::load_stain_model(source_model_path);
  } else {
    src_model = mdf::fit_stain_model(src, opts, rng);
  }
  if (!target_model_path.empty()) {
    tgt_model = mdf::load_stain_model(target_model_path);
  } else {
    if (target.empty())
      throw mdf::ValidationError("stain-normalize needs --target or --target-model");
    mdf::RgbImage tgt = mdf::read_ppm(target);
    mdf::Rng tgt_rng = rng.fork(1);
    tgt_model = mdf::fit_stain_model(tgt, opts, tgt_rng);
  }

  mdf::RgbImage result = mdf::normalize_to_target(src, src_model, tgt_model);
  mdf::write_ppm(result, out);

  if (!save_source_model.empty()) mdf::save_stain_model(src_model, save_source_model);
  if (!save_target_model.empty()) mdf::save_stain_model(tgt_model, save_target_model);

  auto model_json = [](const mdf::StainModel& m) {
    return json{{"W", m.basis}, {"c99", m.c99}};
  };
  emit(json{{"out", out},
            {"source_model", model_json(src_model)},
            {"target_model", model_json(tgt_model)}},
       "");
  return 0;
}

// ---------------------------------------------------------------------------
// survey

int cmd_survey(const std::string& table, const std::string& out) {
  std::array<std::uint64_t, 4> cells{};
  std::size_t pos = 0;
  std::stringstream ss(table);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    try {
      long long v = std::stoll(tok, &used);
      if (v < 0 || used != tok.size() || pos >= 4) throw std::out_of_range("bad cell");
      cells[pos++] = static_cast<std::uint64_t>(v);
    } catch (...) {
      throw mdf::ValidationError("--table expects four non-negative integers a,b,c,d");
    }
  }
  if (pos != 4) throw mdf::ValidationError("--table expects four non-negative integers a,b,c,d");

  double p = mdf::fisher_exact_two_sided({cells[0], cells[1], cells[2], cells[3]});
  emit(json{{"table", cells}, {"p_value", p}}, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdf: genotype-conditional diffusion toolkit for histopathology patches"};
  app.require_subcommand(1);

  CommonArgs common;
  auto* seed_opt = app.add_option("--seed", common.seed, "seed for all randomness of the command");
  app.add_option("--config", common.config_path, "JSON run configuration");

  // make-dataset
  auto* mk = app.add_subcommand("make-dataset", "tile annotated slides into labeled patches");
  std::string slides_dir, annotations_path, out_dir = "patches", manifest_path = "manifest.jsonl";
  mk->add_option("--slides", slides_dir, "directory with <slide_id>.ppm images")->required();
  mk->add_option("--annotations", annotations_path, "JSON annotation file")->required();
  mk->add_option("--out-dir", out_dir, "directory for patch images");
  mk->add_option("--manifest", manifest_path, "manifest output path");

  // train
  auto* tr = app.add_subcommand("train", "train the conditional denoiser");
  TrainArgs train_args;
  tr->add_option("--manifest", train_args.manifest, "dataset manifest");
  tr->add_option("--toy", train_args.toy, "built-in toy task (two-gaussians)");
  tr->add_option("--out", train_args.out, "checkpoint output path");
  tr->add_option("--loss-log", train_args.loss_log, "CSV loss log path");
  int tr_steps = -1, tr_batch = -1;
  double tr_lr = -1.0, tr_c = -1.0;
  std::string tr_weighting;
  tr->add_option("--steps", tr_steps, "optimizer steps");
  tr->add_option("--batch", tr_batch, "batch size");
  tr->add_option("--lr", tr_lr, "learning rate");
  tr->add_option("--weighting", tr_weighting, "loss weighting: simple or p2");
  tr->add_option("--c", tr_c, "vlb mixing coefficient");

  // sample
  auto* sa = app.add_subcommand("sample", "generate samples from a checkpoint");
  std::string sa_ckpt, sa_label, sa_out = "samples.f32", sa_mode = "vector";
  int sa_count = 1, sa_width = 0, sa_height = 0;
  sa->add_option("--checkpoint", sa_ckpt, "checkpoint path")->required();
  sa->add_option("--label", sa_label, "genotype label to condition on")->required();
  sa->add_option("--count", sa_count, "number of samples");
  sa->add_option("--out", sa_out, "output file (vector mode) or prefix (image mode)");
  sa->add_option("--mode", sa_mode, "vector or image");
  sa->add_option("--width", sa_width, "image width (image mode)");
  sa->add_option("--height", sa_height, "image height (image mode)");

  // embed
  auto* em = app.add_subcommand("embed", "extract features from images");
  std::vector<std::string> em_images;
  std::string em_manifest, em_extractor = "histogram", em_space = "final",
              em_out = "features.f32";
  int em_proj_dim = 64;
  em->add_option("--images", em_images, "PPM images");
  em->add_option("--manifest", em_manifest, "take images from a manifest");
  em->add_option("--extractor", em_extractor, "identity, random-projection, or histogram");
  em->add_option("--proj-dim", em_proj_dim, "random projection dimension");
  em->add_option("--space", em_space, "feature space tag");
  em->add_option("--out", em_out, "F32 output path");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "compute IS/FID/sFID/precision/recall");
  std::string ev_real, ev_gen, ev_real_spatial, ev_gen_spatial, ev_probs, ev_out;
  int ev_k = 3;
  bool ev_zscore = false;
  ev->add_option("--real", ev_real, "real features (F32)")->required();
  ev->add_option("--gen", ev_gen, "generated features (F32)")->required();
  ev->add_option("--real-spatial", ev_real_spatial, "real spatial features (F32)");
  ev->add_option("--gen-spatial", ev_gen_spatial, "generated spatial features (F32)");
  ev->add_option("--probs", ev_probs, "class probability table (F32) for IS");
  ev->add_option("--k", ev_k, "k for the k-NN manifolds");
  ev->add_flag("--zscore", ev_zscore, "z-score features with the real set's statistics");
  ev->add_option("--out", ev_out, "write the JSON report here instead of stdout");

  // stain-normalize
  auto* st = app.add_subcommand("stain-normalize", "transfer an image to a target stain basis");
  std::string st_input, st_target, st_out = "normalized.ppm";
  std::string st_source_model, st_target_model, st_save_source, st_save_target;
  double st_lambda = 0.1;
  int st_iters = 200;
  st->add_option("--input", st_input, "source PPM image")->required();
  st->add_option("--target", st_target, "target (reference) PPM image");
  st->add_option("--out", st_out, "output PPM path");
  st->add_option("--lambda", st_lambda, "sparsity penalty for stain fitting");
  st->add_option("--iters", st_iters, "fitting iterations");
  st->add_option("--source-model", st_source_model, "load source stain model JSON");
  st->add_option("--target-model", st_target_model, "load target stain model JSON");
  st->add_option("--save-source-model", st_save_source, "write fitted source model JSON");
  st->add_option("--save-target-model", st_save_target, "write fitted target model JSON");

  // survey
  auto* su = app.add_subcommand("survey", "two-sided Fisher exact test on a 2x2 table");
  std::string su_table, su_out;
  su->add_option("--table", su_table, "a,b,c,d counts (row = ground truth)")->required();
  su->add_option("--out", su_out, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }
  common.seed_explicit = seed_opt->count() > 0;

  try {
    if (*mk) return cmd_make_dataset(common, slides_dir, annotations_path, out_dir, manifest_path);
    if (*tr) {
      if (tr_steps >= 0) train_args.steps = tr_steps;
      if (tr_batch >= 1) train_args.batch = tr_batch;
      if (tr_lr > 0) train_args.lr = tr_lr;
      if (tr_c >= 0) train_args.c = tr_c;
      if (!tr_weighting.empty()) train_args.weighting = tr_weighting;
      return cmd_train(common, train_args);
    }
    if (*sa) {
      if (sa_count < 1) throw mdf::ValidationError("--count must be >= 1");
      return cmd_sample(common, sa_ckpt, sa_label, sa_count, sa_out, sa_mode, sa_width,
                        sa_height);
    }
    if (*em)
      return cmd_embed(common, em_images, em_manifest, em_extractor, em_proj_dim, em_space,
                       em_out);
    if (*ev)
      return cmd_evaluate(ev_real, ev_gen, ev_real_spatial, ev_gen_spatial, ev_probs, ev_k,
                          ev_zscore, ev_out);
    if (*st)
      return cmd_stain_normalize(common, st_input, st_target, st_out, st_lambda, st_iters,
                                 st_source_model, st_target_model, st_save_source,
                                 st_save_target);
    if (*su) return cmd_survey(su_table, su_out);
  } catch (const mdf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
