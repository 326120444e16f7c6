/*
 * Copyright 2026 The lblm-ava Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// lblm: corpus synthesis, training, generation and evaluation.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "lblm/checkpoint.hpp"
#include "lblm/config.hpp"
#include "lblm/corpus.hpp"
#include "lblm/error.hpp"
#include "lblm/model.hpp"
#include "lblm/params.hpp"
#include "lblm/pose_io.hpp"
#include "lblm/report.hpp"
#include "lblm/tensor_io.hpp"
#include "lblm/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lblm;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key=value configuration file");
  cmd->add_option("--set", c.sets, "override one configuration key (key=value)");
  cmd->add_option("--seed", c.seed, "master seed; wins over LBLM_SEED and the config file");
  cmd->add_option("--threads", c.threads, "worker threads");
}

config::RunConfig run_config(const Common& c) {
  config::RunConfig rc = c.config_path.empty() ? config::RunConfig{} : config::RunConfig::load(c.config_path);
  for (const std::string& s : c.sets) rc.set_assignment(s);
  if (c.seed) rc.override_seed(*c.seed);
  if (c.threads) rc.set("threads", std::to_string(*c.threads));
  return rc;
}

std::string pick_path(const std::string& flag, const config::RunConfig& rc, const std::string& key,
                      const std::string& what) {
  if (!flag.empty()) return flag;
  const std::string v = rc.get_string(key, "");
  if (v.empty()) throw UsageError(fmt::format("no {} given (flag or config key '{}')", what, key));
  return v;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string fmt_num(double v) { return fmt::format("{:.17g}", v); }

// ---- synth ----

int cmd_synth(const Common& common, const std::string& out_flag, const std::string& keypoints, double fps) {
  config::RunConfig rc = run_config(common);
  if (!keypoints.empty()) {
    if (out_flag.empty()) throw UsageError("--from-keypoints needs --out FILE.gsq.json");
    pose::GestureFile g;
    g.sequence = pose::keypoints_to_sequence(read_json(keypoints), pose::default_layout(), fps);
    g.metadata = {{"source", fs::path(keypoints).filename().string()}};
    pose::write_gesture(out_flag, g);
    std::cout << out_flag << "\n";
    return 0;
  }
  const fs::path out = pick_path(out_flag, rc, "corpus_dir", "output directory");
  const corpus::SynthConfig sc = config::synth_config(rc);
  const json manifest = corpus::write_corpus(out, corpus::synthesize(sc), corpus::to_json(sc));
  std::cout << fmt::format("wrote {} train and {} heldout sequences to {}\n", manifest["train"].get<std::size_t>(),
                           manifest["heldout"].get<std::size_t>(), out.string());
  return 0;
}

// ---- train ----

model::ModelConfig corpus_model_config(const config::RunConfig& rc, const std::vector<corpus::Item>& items) {
  model::ModelConfig mc = config::model_config(rc);
  // Feature widths follow the corpus unless the config pins them.
  const model::Conditioning& f = items.front().features;
  if (!rc.has("model.text_dim") && f.text.width()) mc.text_dim = f.text.width();
  if (!rc.has("model.audio_dim") && f.audio.width()) mc.audio_dim = f.audio.width();
  if (!rc.has("model.video_dim") && f.video.width()) mc.video_dim = f.video.width();
  return mc;
}

struct LoadedCorpus {
  std::vector<corpus::Item> train, heldout;
};

LoadedCorpus load_corpus(const fs::path& dir) {
  if (!fs::is_regular_file(dir / "manifest.json")) throw IoError("no corpus manifest in " + dir.string());
  LoadedCorpus c{corpus::read_split(dir, "train"), corpus::read_split(dir, "heldout")};
  if (c.train.empty()) throw IoError("corpus has no training sequences: " + dir.string());
  if (c.heldout.empty()) c.heldout = c.train;
  return c;
}

training::TrainResult run_training(const model::ModelConfig& mc, const training::TrainConfig& tc,
                                   const LoadedCorpus& c) {
  const model::PoseStats stats = model::pose_stats(corpus::poses(c.train));
  model::Model init = model::init_model(mc, c.train.front().pose.layout, stats);
  return training::train(std::move(init), c.train, c.heldout, tc);
}

int cmd_train(const Common& common, const std::string& corpus_flag, const std::string& ckpt_flag,
              std::string report, bool wallclock, std::optional<std::size_t> epochs) {
  config::RunConfig rc = run_config(common);
  if (epochs) rc.set("train.epochs", std::to_string(*epochs));
  const fs::path corpus_dir = pick_path(corpus_flag, rc, "corpus_dir", "corpus directory");
  const fs::path ckpt_dir = pick_path(ckpt_flag, rc, "checkpoint_dir", "checkpoint directory");
  const LoadedCorpus c = load_corpus(corpus_dir);
  const model::ModelConfig mc = corpus_model_config(rc, c.train);
  const training::TrainConfig tc = config::train_config(rc);
  training::TrainResult r = run_training(mc, tc, c);

  checkpoint::Checkpoint ck{std::move(r.model), r.epochs_done, {tc.seed, r.epochs_done}};
  checkpoint::save(ckpt_dir, ck);
  if (report.empty()) report = (ckpt_dir / "report.csv").string();
  write_file(report, r.report.csv(wallclock));
  std::cout << fmt::format("trained {} epochs; checkpoint {}\n", r.epochs_done, ckpt_dir.string());
  return 0;
}

// ---- generate ----

encoder::FeatureTrack optional_track(const fs::path& dir, const std::string& id, encoder::Modality m) {
  const fs::path p = dir / fmt::format("{}.{}.ftr", id, encoder::modality_name(m));
  if (fs::exists(p)) return corpus::read_track(p);
  encoder::FeatureTrack t;
  t.modality = m;
  return t;
}

std::vector<std::string> feature_ids(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::string> ids;
  const std::string suffix = ".text.ftr";
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > suffix.size() && name.ends_with(suffix))
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

struct GenerateFlags {
  std::string checkpoint, features, out, layout;
  std::vector<std::string> ids;
  bool no_postprocess = false;
  std::optional<std::size_t> smooth_k;
  std::optional<double> smooth_sigma;
  std::string smooth_mode, align;
};

int cmd_generate(const Common& common, const GenerateFlags& f) {
  config::RunConfig rc = run_config(common);
  const fs::path ckpt_dir = pick_path(f.checkpoint, rc, "checkpoint_dir", "checkpoint directory");
  const fs::path out = pick_path(f.out, rc, "out_dir", "output directory");
  if (f.features.empty()) throw UsageError("--features DIR is required");
  checkpoint::Checkpoint ck = checkpoint::load(ckpt_dir);
  model::Model& m = ck.model;
  if (!f.layout.empty()) {
    const pose::BodyLayout want = pose::layout_from_json(read_json(f.layout));
    if (pose::layout_to_json(want) != pose::layout_to_json(m.layout))
      throw ConfigError("layout in " + f.layout + " does not match the checkpoint layout");
  }
  post::PostConfig& pc = m.config.post;
  if (f.smooth_k) pc.smoothing.filter_size = *f.smooth_k;
  if (f.smooth_sigma) pc.smoothing.sigma = *f.smooth_sigma;
  if (!f.smooth_mode.empty()) pc.smoothing.mode = post::parse_smoothing_mode(f.smooth_mode);
  if (!f.align.empty()) {
    if (f.align != "on" && f.align != "off") throw UsageError("--align takes on or off");
    pc.align_enabled = f.align == "on";
  }
  post::validate(pc.smoothing);

  const std::vector<std::string> ids = f.ids.empty() ? feature_ids(f.features) : f.ids;
  const std::uint64_t seed = rc.master_seed();
  model::GenerateOptions opts;
  opts.postprocess = !f.no_postprocess;
  opts.threads = rc.get_size("threads", 1);
  fs::create_directories(out);
  for (const std::string& id : ids) {
    model::Conditioning c;
    c.text = optional_track(f.features, id, encoder::Modality::kText);
    c.audio = optional_track(f.features, id, encoder::Modality::kAudio);
    c.video = optional_track(f.features, id, encoder::Modality::kVideo);
    if (c.text.length() == 0) throw IoError(fmt::format("no text track for '{}' in {}", id, f.features));
    const model::Generated g = model::generate(m, c, Rng(seed).split(name_hash(id)), opts);
    pose::GestureFile file;
    file.sequence = g.sequence;
    file.metadata = json{
        {"id", id},
        {"seed", seed},
        {"chain", g.chain},
        {"raw", f.no_postprocess},
        {"smoothing",
         json{{"enabled", pc.smoothing_enabled},
          {"kernel_size", pc.smoothing.filter_size},
          {"sigma", pc.smoothing.sigma},
          {"mode", post::smoothing_mode_name(pc.smoothing.mode)}}},
        {"align", pc.align_enabled},
        {"order", post::order_name(pc.order)},
    };
    if (!g.chain_scores.empty()) file.metadata["chain_scores"] = g.chain_scores;
    pose::write_gesture(out / (id + ".gsq.json"), file);
  }
  std::cout << fmt::format("generated {} sequences in {}\n", ids.size(), out.string());
  return 0;
}

// ---- eval ----

std::vector<Tensor> read_gesture_tree(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.ends_with(".gsq.json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .gsq.json files under " + dir.string());
  std::vector<Tensor> out;
  for (const fs::path& p : files) {
    try {
      out.push_back(pose::read_gesture(p).sequence.frames);
    } catch (const Error& e) {
      throw IoError(fmt::format("{}: {}", p.string(), e.what()));
    }
  }
  return out;
}

metrics::ReportOptions report_options(const config::RunConfig& rc) {
  metrics::ReportOptions o;
  o.embedding_seed = rc.get_u64("metrics.seed", o.embedding_seed);
  o.feature_net_seed = rc.get_u64("metrics.feature_net_seed", o.feature_net_seed);
  const std::string mode = rc.get_string("metrics.gdi_mode", "normalized");
  if (mode == "raw") o.gdi_mode = metrics::GdiMode::kRaw;
  else if (mode != "normalized") throw ConfigError("metrics.gdi_mode must be raw or normalized, got '" + mode + "'");
  return o;
}

const std::vector<std::string> kMetricColumns = {"fgd", "fid", "apd", "grs", "gdi"};

std::vector<std::string> metric_cells(const metrics::MetricReport& r) {
  return {fmt_num(r.fgd), fmt_num(r.fid), fmt_num(r.apd), r.grs ? fmt_num(*r.grs) : "", fmt_num(r.gdi)};
}

std::string join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s;
}

int cmd_eval(const Common& common, const std::string& real, const std::string& gen, const std::string& ckpt,
             const std::string& out, const std::string& csv, const std::string& label) {
  config::RunConfig rc = run_config(common);
  if (real.empty() || gen.empty()) throw UsageError("eval needs --real DIR and --gen DIR");
  const std::vector<Tensor> r = read_gesture_tree(real), g = read_gesture_tree(gen);
  std::optional<checkpoint::Checkpoint> ck;
  std::optional<disc::MlpDiscriminator> d;
  if (!ckpt.empty()) {
    ck = checkpoint::load(ckpt);
    d.emplace(disc::load_discriminator(ck->model.params));
  }
  const metrics::MetricReport rep = metrics::compute_report(r, g, d ? &*d : nullptr, report_options(rc));
  json j = metrics::to_json(rep);
  if (!label.empty()) j["label"] = label;
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else write_file(out, text);
  if (!csv.empty()) {
    std::vector<std::string> head = {"label"}, row = {label};
    head.insert(head.end(), kMetricColumns.begin(), kMetricColumns.end());
    for (std::string& c : metric_cells(rep)) row.push_back(std::move(c));
    write_file(csv, join(head) + "\n" + join(row) + "\n");
  }
  return 0;
}

// ---- ablate ----

struct Toggles {
  bool adversarial = true, refinement = true, smoothing = true, multihead = true, parallel_diffusion = true,
       xl_memory = true, multimodal_embed = true;
};

const std::vector<std::string> kToggleNames = {"adversarial", "refinement",     "smoothing",       "multihead",
                                               "parallel_diffusion", "xl_memory", "multimodal_embed"};

std::vector<bool> toggle_values(const Toggles& t) {
  return {t.adversarial, t.refinement, t.smoothing, t.multihead, t.parallel_diffusion, t.xl_memory,
          t.multimodal_embed};
}

const std::vector<std::string>& ablation_names() {
  static const std::vector<std::string> names = {
      "full",        "no-adversarial", "no-refinement", "no-smoothing",       "no-multihead",
      "no-parallel-diffusion", "no-xl-memory", "no-multimodal-embed", "minimal"};
  return names;
}

Toggles ablation(const std::string& name) {
  Toggles t;
  if (name == "full") return t;
  // The incremental baseline: multimodal embedding only.
  if (name == "minimal") return Toggles{false, false, false, false, false, false, true};
  if (name == "no-adversarial") t.adversarial = false;
  else if (name == "no-refinement") t.refinement = false;
  else if (name == "no-smoothing") t.smoothing = false;
  else if (name == "no-multihead") t.multihead = false;
  else if (name == "no-parallel-diffusion") t.parallel_diffusion = false;
  else if (name == "no-xl-memory") t.xl_memory = false;
  else if (name == "no-multimodal-embed") t.multimodal_embed = false;
  else throw UsageError("unknown ablation '" + name + "'");
  return t;
}

void apply(const Toggles& t, model::ModelConfig& mc, training::TrainConfig& tc) {
  tc.adversarial = t.adversarial;
  mc.refine.enable_weighted = t.refinement;
  mc.post.smoothing_enabled = t.smoothing;
  mc.refine.enable_mha = t.multihead;
  if (!t.parallel_diffusion) mc.diffusion.n_chains = 1;
  mc.encoder.xl_memory = t.xl_memory;
  mc.multimodal_embed = t.multimodal_embed;
}

int cmd_ablate(const Common& common, const std::string& corpus_flag, const std::string& out,
               std::vector<std::string> names, std::optional<std::size_t> epochs) {
  config::RunConfig rc = run_config(common);
  if (epochs) rc.set("train.epochs", std::to_string(*epochs));
  const fs::path corpus_dir = pick_path(corpus_flag, rc, "corpus_dir", "corpus directory");
  if (names.empty()) names = ablation_names();
  for (const std::string& n : names) ablation(n);
  const LoadedCorpus c = load_corpus(corpus_dir);
  const metrics::ReportOptions ro = report_options(rc);
  const std::uint64_t seed = rc.master_seed();
  const std::size_t threads = rc.get_size("threads", 1);

  std::vector<corpus::Item> all = c.train;
  all.insert(all.end(), c.heldout.begin(), c.heldout.end());
  const std::vector<Tensor> real = corpus::frames(corpus::poses(all));

  std::vector<std::string> head = {"config"};
  head.insert(head.end(), kToggleNames.begin(), kToggleNames.end());
  head.insert(head.end(), kMetricColumns.begin(), kMetricColumns.end());
  std::string text = join(head) + "\n";
  for (const std::string& name : names) {
    const Toggles t = ablation(name);
    model::ModelConfig mc = corpus_model_config(rc, c.train);
    training::TrainConfig tc = config::train_config(rc);
    apply(t, mc, tc);
    const training::TrainResult r = run_training(mc, tc, c);
    std::vector<Tensor> gen;
    model::GenerateOptions opts;
    opts.threads = threads;
    for (const corpus::Item& item : all)
      gen.push_back(model::generate(r.model, item.features, Rng(seed).split(name_hash(item.id)), opts).sequence.frames);
    const disc::MlpDiscriminator d(disc::load_discriminator(r.model.params));
    const metrics::MetricReport rep = metrics::compute_report(real, gen, &d, ro);
    std::vector<std::string> row = {name};
    for (bool b : toggle_values(t)) row.push_back(b ? "1" : "0");
    for (std::string& cell : metric_cells(rep)) row.push_back(std::move(cell));
    text += join(row) + "\n";
    std::cerr << fmt::format("{}: fgd={:.4f} grs={:.4f}\n", name, rep.fgd, rep.grs.value_or(0.0));
  }
  if (out.empty()) std::cout << text;
  else write_file(out, text);
  return 0;
}

// ---- inspect ----

json tensor_summary(const Tensor& t) {
  double lo = 0.0, hi = 0.0;
  if (t.size()) {
    lo = *std::min_element(t.values().begin(), t.values().end());
    hi = *std::max_element(t.values().begin(), t.values().end());
  }
  return {{"shape", t.shape()}, {"min", lo}, {"max", hi}};
}

int cmd_inspect(const std::string& path_str) {
  const fs::path path = path_str;
  const std::string name = path.filename().string();
  json j;
  if (fs::is_directory(path)) {
    if (!fs::exists(path / "manifest.json")) throw IoError("no manifest.json in " + path.string());
    const json m = read_json(path / "manifest.json");
    const std::string format = m.value("format", "");
    if (format == "lblm-checkpoint") {
      const checkpoint::Checkpoint ck = checkpoint::load(path);
      std::size_t count = 0;
      for (const auto& [n, t] : ck.model.params.all()) count += t.size();
      j = {{"kind", "checkpoint"},
           {"epoch", ck.epoch},
           {"tensors", m["tensors"].size()},
           {"parameters", count},
           {"joints", ck.model.layout.joints.size()},
           {"config", m["config"]}};
    } else if (format == "lblm-corpus") {
      j = {{"kind", "corpus"},
           {"train", m["train"].size()},
           {"heldout", m["heldout"].size()},
           {"files", m["files"].size()},
           {"generator", m["generator"]}};
    } else {
      throw IoError("unrecognized manifest format in " + path.string());
    }
  } else if (name.ends_with(".gsq.json")) {
    const pose::GestureFile g = pose::read_gesture(path);
    std::size_t violations = 0;
    for (std::size_t t = 0; t < g.sequence.length(); ++t)
      if (!pose::check_constraints(g.sequence.frame(t), g.sequence.layout).ok()) ++violations;
    j = {{"kind", "gesture"},
         {"frames", g.sequence.length()},
         {"joints", g.sequence.layout.joints.size()},
         {"fps", g.sequence.fps},
         {"constraint_violations", violations},
         {"metadata", g.metadata}};
  } else if (name.ends_with(".ftr")) {
    const encoder::FeatureTrack t = corpus::read_track(path);
    j = {{"kind", "feature_track"},
         {"modality", encoder::modality_name(t.modality)},
         {"length", t.length()},
         {"width", t.width()},
         {"frame_rate", t.frame_rate}};
  } else {
    j = tensor_summary(load_tensor(path));
    j["kind"] = "tensor";
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lblm: multimodal gesture generation"};
  app.require_subcommand(1);
  Common common;

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  std::string synth_out, keypoints;
  double keypoint_fps = 30.0;
  add_common(synth, common);
  synth->add_option("--out", synth_out, "corpus directory (or .gsq.json with --from-keypoints)");
  synth->add_option("--from-keypoints", keypoints, "convert a [frames][joints][3] JSON file instead");
  synth->add_option("--fps", keypoint_fps, "frame rate of the keypoint file");

  auto* train = app.add_subcommand("train", "train a model on a corpus");
  std::string train_corpus, train_ckpt, train_report;
  bool wallclock = false;
  std::optional<std::size_t> train_epochs;
  add_common(train, common);
  train->add_option("--corpus", train_corpus, "corpus directory");
  train->add_option("--checkpoint", train_ckpt, "checkpoint directory to write");
  train->add_option("--report", train_report, "report CSV (default <checkpoint>/report.csv)");
  train->add_flag("--wallclock", wallclock, "record per-epoch seconds in the report");
  train->add_option("--epochs", train_epochs, "override train.epochs");

  auto* generate = app.add_subcommand("generate", "generate gestures from feature tracks");
  GenerateFlags gf;
  add_common(generate, common);
  generate->add_option("--checkpoint", gf.checkpoint, "checkpoint directory");
  generate->add_option("--features", gf.features, "directory holding <id>.{text,audio,video}.ftr");
  generate->add_option("--id", gf.ids, "request ids (default: every text track in --features)");
  generate->add_option("--out", gf.out, "output directory");
  generate->add_option("--layout", gf.layout, "expected layout JSON; must match the checkpoint");
  generate->add_flag("--no-postprocess", gf.no_postprocess, "emit the raw decoder output");
  generate->add_option("--smooth-k", gf.smooth_k, "smoothing kernel size (odd)");
  generate->add_option("--smooth-sigma", gf.smooth_sigma, "smoothing kernel width");
  generate->add_option("--smooth-mode", gf.smooth_mode, "paper or normalized");
  generate->add_option("--align", gf.align, "on or off");

  auto* eval = app.add_subcommand("eval", "compare generated and real gesture sets");
  std::string eval_real, eval_gen, eval_ckpt, eval_out, eval_csv, eval_label;
  add_common(eval, common);
  eval->add_option("--real", eval_real, "directory of real .gsq.json files");
  eval->add_option("--gen", eval_gen, "directory of generated .gsq.json files");
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint whose discriminator scores GRS");
  eval->add_option("--out", eval_out, "metrics JSON path (default stdout)");
  eval->add_option("--csv", eval_csv, "also write a one-row CSV");
  eval->add_option("--label", eval_label, "row label");

  auto* ablate = app.add_subcommand("ablate", "train and score component ablations");
  std::string ablate_corpus, ablate_out;
  std::vector<std::string> ablate_configs;
  std::optional<std::size_t> ablate_epochs;
  add_common(ablate, common);
  ablate->add_option("--corpus", ablate_corpus, "corpus directory");
  ablate->add_option("--out", ablate_out, "CSV path (default stdout)");
  ablate->add_option("--configs", ablate_configs, "subset of: full no-adversarial no-refinement no-smoothing "
                                                  "no-multihead no-parallel-diffusion no-xl-memory "
                                                  "no-multimodal-embed minimal")
      ->delimiter(',');
  ablate->add_option("--epochs", ablate_epochs, "override train.epochs");

  auto* inspect = app.add_subcommand("inspect", "summarize a checkpoint, corpus or data file");
  std::string inspect_path;
  inspect->add_option("path", inspect_path, "file or directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) return cmd_synth(common, synth_out, keypoints, keypoint_fps);
    if (*train) return cmd_train(common, train_corpus, train_ckpt, train_report, wallclock, train_epochs);
    if (*generate) return cmd_generate(common, gf);
    if (*eval) return cmd_eval(common, eval_real, eval_gen, eval_ckpt, eval_out, eval_csv, eval_label);
    if (*ablate) return cmd_ablate(common, ablate_corpus, ablate_out, ablate_configs, ablate_epochs);
    if (*inspect) return cmd_inspect(inspect_path);
  } catch (const NumericError& e) {
    std::cerr << "lblm: numeric abort: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "lblm: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
