//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Every subcommand reads a merged configuration
// (defaults < config file < flags), echoes the effective settings into the
// output directory, and finishes by writing a run record with content
// digests of everything consumed and produced. Domain failures exit
// nonzero after writing a machine-readable error report.
//

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cliffmask/bench/cliffs.hpp"
#include "cliffmask/bench/embed_analysis.hpp"
#include "cliffmask/bench/metrics.hpp"
#include "cliffmask/bench/potency.hpp"
#include "cliffmask/bench/splits.hpp"
#include "cliffmask/chem/atom_vocab.hpp"
#include "cliffmask/core/config.hpp"
#include "cliffmask/core/digest.hpp"
#include "cliffmask/core/log.hpp"
#include "cliffmask/core/strings.hpp"
#include "cliffmask/depict/sample_gen.hpp"
#include "cliffmask/frag/fragment.hpp"
#include "cliffmask/model/embed.hpp"
#include "cliffmask/model/sme.hpp"
#include "cliffmask/model/train.hpp"

namespace fs = std::filesystem;
namespace bench = cliffmask::bench;
namespace chem = cliffmask::chem;
namespace depict = cliffmask::depict;
namespace frag = cliffmask::frag;
namespace model = cliffmask::model;
using cliffmask::Config;
using cliffmask::Errc;
using cliffmask::raise;

namespace {

// ---------------------------------------------------------------------------
// Run context: merged config, effective-value capture, artifact digests.

class Run {
 public:
  Run(std::string subcommand, Config cfg)
      : subcommand_(std::move(subcommand)), cfg_(std::move(cfg)) {}

  // Typed getters that record the value actually used.
  std::string str(const std::string& key, const std::string& dflt) {
    std::string v = cfg_.get_str(key, dflt);
    effective_[key] = v;
    return v;
  }
  std::string req(const std::string& key) {
    std::string v = cfg_.require_str(key);
    effective_[key] = v;
    return v;
  }
  std::int64_t i64(const std::string& key, std::int64_t dflt) {
    std::int64_t v = cfg_.get_int(key, dflt);
    effective_[key] = std::to_string(v);
    return v;
  }
  double f64(const std::string& key, double dflt) {
    double v = cfg_.get_double(key, dflt);
    effective_[key] = cliffmask::fmt_double(v);
    return v;
  }
  bool flag(const std::string& key, bool dflt) {
    bool v = cfg_.get_bool(key, dflt);
    effective_[key] = v ? "true" : "false";
    return v;
  }

  const std::string& out_dir() const { return out_dir_; }
  std::uint64_t seed() const { return seed_; }
  int workers() const { return workers_; }

  void begin() {
    out_dir_ = str("out", "cliffmask_out");
    seed_ = static_cast<std::uint64_t>(i64("seed", 0));
    workers_ = static_cast<int>(i64("workers", 1));
    if (workers_ < 1) raise(Errc::kConfigInvalid, "workers must be >= 1");
    fs::create_directories(out_dir_);
  }

  fs::path out_path(const std::string& rel) const {
    return fs::path(out_dir_) / rel;
  }

  void add_input(const std::string& path) { inputs_.push_back(path); }
  void add_output(const std::string& rel) { outputs_.push_back(rel); }

  // Writes effective_config.txt and run_record.json; call once on success.
  void finish() {
    std::string cfg_text;
    for (const auto& [k, v] : effective_) cfg_text += k + "=" + v + "\n";
    {
      std::ofstream out(out_path("effective_config.txt"), std::ios::binary);
      out << cfg_text;
    }
    nlohmann::json rec;
    rec["subcommand"] = subcommand_;
    rec["seed"] = seed_;
    rec["workers"] = workers_;
    rec["config_sha256"] = cliffmask::sha256_hex(cfg_text);
    nlohmann::json jin = nlohmann::json::object();
    for (const std::string& p : inputs_) {
      jin[p] = cliffmask::sha256_file_hex(p);
    }
    rec["inputs"] = jin;
    nlohmann::json jout = nlohmann::json::object();
    jout["effective_config.txt"] = cliffmask::sha256_hex(cfg_text);
    for (const std::string& rel : outputs_) {
      jout[rel] = cliffmask::sha256_file_hex(out_path(rel).string());
    }
    rec["outputs"] = jout;
    std::ofstream out(out_path("run_record.json"), std::ios::binary);
    out << rec.dump(2) << "\n";
  }

 private:
  std::string subcommand_;
  Config cfg_;
  std::map<std::string, std::string> effective_;
  std::string out_dir_ = "cliffmask_out";
  std::uint64_t seed_ = 0;
  int workers_ = 1;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

// ---------------------------------------------------------------------------
// Shared loaders.

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  for (const std::string& piece : cliffmask::split(csv, ',')) {
    std::string item{cliffmask::trim(piece)};
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

frag::CleavageRuleTable load_rules(Run& run) {
  std::string path = run.str("rules", "");
  if (path.empty()) return frag::CleavageRuleTable::builtin_default();
  run.add_input(path);
  return frag::CleavageRuleTable::from_file(path);
}

// Plain corpus: id + SMILES, no potency. Unparsable rows are skipped with a
// warning so vocabulary building tolerates dirty corpora.
std::vector<depict::CorpusEntry> load_corpus(Run& run,
                                             const std::string& path) {
  run.add_input(path);
  cliffmask::CsvTable t = cliffmask::read_csv(path);
  int cs = t.require_column(run.str("smiles-col", "smiles"));
  int ci = t.column(run.str("id-col", "id"));
  std::vector<depict::CorpusEntry> out;
  std::size_t skipped = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    depict::CorpusEntry e;
    e.smiles = t.rows[r][static_cast<std::size_t>(cs)];
    e.id = ci >= 0 ? t.rows[r][static_cast<std::size_t>(ci)]
                   : "mol" + std::to_string(r + 1);
    try {
      e.graph = chem::parse_smiles(e.smiles);
    } catch (const cliffmask::Error& err) {
      cliffmask::log_warn("skip row " + std::to_string(r + 2) + " (" +
                          e.smiles + "): " + err.what());
      ++skipped;
      continue;
    }
    out.push_back(std::move(e));
  }
  if (out.empty()) raise(Errc::kEmptyCorpus, "no parsable molecules in " + path);
  if (skipped > 0) {
    cliffmask::log_info("corpus: " + std::to_string(out.size()) + " kept, " +
                        std::to_string(skipped) + " skipped");
  }
  return out;
}

// Potency dataset through the benchmark ingest path; rejects land in
// rejects.csv next to the other artifacts.
bench::IngestResult load_dataset(Run& run) {
  std::string path = run.req("input");
  run.add_input(path);
  std::string unit = run.str("unit", "pk");
  bench::PotencyUnit u;
  std::string default_value_col;
  if (unit == "pk") {
    u = bench::PotencyUnit::kPk;
    default_value_col = "y";
  } else if (unit == "nm") {
    u = bench::PotencyUnit::kNanomolar;
    default_value_col = "exp_mean_nm";
  } else {
    raise(Errc::kConfigInvalid, "unit must be pk or nm, got: " + unit);
  }
  bench::ColumnMap cols;
  cols.id = run.str("id-col", "id");
  cols.smiles = run.str("smiles-col", "smiles");
  cols.value = run.str("value-col", default_value_col);
  cols.split = run.str("split-col", "split");
  bench::IngestResult res = bench::ingest(path, cols, u);
  if (!res.rejects.empty()) {
    bench::write_rejects_csv(run.out_path("rejects.csv").string(),
                             res.rejects);
    run.add_output("rejects.csv");
    cliffmask::log_warn(std::to_string(res.rejects.size()) +
                        " rows rejected; see rejects.csv");
  }
  if (res.records.empty()) {
    raise(Errc::kEmptyCorpus, "no usable records in " + path);
  }
  return res;
}

template <typename T>
std::vector<T> render_pixels(const chem::MoleculeGraph& g, int image_size) {
  depict::RenderConfig rc;
  rc.width = image_size;
  rc.height = image_size;
  depict::Layout lay = depict::layout_2d(g);
  depict::RenderResult res = depict::render(g, lay, rc);
  return model::normalize_image<T>(res.image);
}

std::string checkpoint_dtype(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::kIoError, "cannot open checkpoint: " + path);
  std::string header;
  if (!std::getline(in, header)) {
    raise(Errc::kIoError, "checkpoint has no header line");
  }
  nlohmann::json j = nlohmann::json::parse(header, nullptr, false);
  if (j.is_discarded() || !j.contains("dtype")) {
    raise(Errc::kIoError, "checkpoint header is not valid JSON");
  }
  return j.at("dtype").get<std::string>();
}

// Dispatch on the stored precision of a checkpoint ("f32"/"f64").
template <typename Fn>
int with_dtype(const std::string& dtype, Fn&& fn) {
  if (dtype == "f32") return fn(float{});
  if (dtype == "f64") return fn(double{});
  raise(Errc::kConfigInvalid, "precision must be f32 or f64, got: " + dtype);
}

std::vector<depict::MaskLevel> parse_levels(const std::string& csv) {
  std::vector<depict::MaskLevel> out;
  for (const std::string& name : split_list(csv)) {
    if (name == "atom") {
      out.push_back(depict::MaskLevel::kAtom);
    } else if (name == "bond") {
      out.push_back(depict::MaskLevel::kBond);
    } else if (name == "motif") {
      out.push_back(depict::MaskLevel::kMotif);
    } else {
      raise(Errc::kConfigInvalid, "unknown mask level: " + name);
    }
  }
  if (out.empty()) raise(Errc::kConfigInvalid, "levels list is empty");
  return out;
}

// ---------------------------------------------------------------------------
// vocab

int run_vocab(Run& run) {
  auto corpus = load_corpus(run, run.req("input"));
  int atom_k = static_cast<int>(run.i64("atom-k", 10));
  int motif_k = static_cast<int>(run.i64("motif-k", 200));
  int min_atoms = static_cast<int>(run.i64("min-atoms", 3));
  frag::CleavageRuleTable rules = load_rules(run);

  std::vector<chem::MoleculeGraph> graphs;
  graphs.reserve(corpus.size());
  for (const auto& e : corpus) graphs.push_back(e.graph);

  chem::AtomVocab av = chem::AtomVocab::build(graphs, atom_k);
  frag::MotifVocab mv = frag::MotifVocab::build(graphs, rules, motif_k,
                                                min_atoms);
  av.save_csv(run.out_path("atom_vocab.csv").string());
  mv.save_csv(run.out_path("motif_vocab.csv").string());
  run.add_output("atom_vocab.csv");
  run.add_output("motif_vocab.csv");
  run.finish();
  std::cout << "vocab: molecules=" << corpus.size()
            << " atom_classes=" << av.size() << " motif_classes=" << mv.size()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// masks

struct MaskSweepPoint {
  std::string subdir;  // "" = write into the output dir itself
  double gamma;
  int image_size;
};

int run_masks(Run& run) {
  auto corpus = load_corpus(run, run.req("input"));
  frag::CleavageRuleTable rules = load_rules(run);
  std::string vocab_dir = run.str("vocab-dir", "");

  chem::AtomVocab av;
  frag::MotifVocab mv;
  if (vocab_dir.empty()) {
    std::vector<chem::MoleculeGraph> graphs;
    for (const auto& e : corpus) graphs.push_back(e.graph);
    av = chem::AtomVocab::build(graphs,
                                static_cast<int>(run.i64("atom-k", 10)));
    mv = frag::MotifVocab::build(graphs, rules,
                                 static_cast<int>(run.i64("motif-k", 200)),
                                 static_cast<int>(run.i64("min-atoms", 3)));
  } else {
    std::string ap = (fs::path(vocab_dir) / "atom_vocab.csv").string();
    std::string mp = (fs::path(vocab_dir) / "motif_vocab.csv").string();
    run.add_input(ap);
    run.add_input(mp);
    av = chem::AtomVocab::load_csv(ap);
    mv = frag::MotifVocab::load_csv(mp);
  }

  double gamma = run.f64("gamma", 0.5);
  int image_size = static_cast<int>(run.i64("image-size", 224));
  std::string gamma_list = run.str("gamma-list", "");
  std::string size_list = run.str("image-size-list", "");
  if (!gamma_list.empty() && !size_list.empty()) {
    raise(Errc::kConfigInvalid,
          "gamma-list and image-size-list cannot be combined; sweep one axis");
  }

  std::vector<MaskSweepPoint> points;
  if (!gamma_list.empty()) {
    for (const std::string& s : split_list(gamma_list)) {
      double g = std::stod(s);
      points.push_back({"gamma_" + cliffmask::fmt_double(g), g, image_size});
    }
  } else if (!size_list.empty()) {
    for (const std::string& s : split_list(size_list)) {
      int sz = std::stoi(s);
      points.push_back({"size_" + std::to_string(sz), gamma, sz});
    }
  } else {
    points.push_back({"", gamma, image_size});
  }

  depict::SampleGenConfig gen;
  gen.patch_size = static_cast<int>(run.i64("patch-size", 16));
  gen.dilation = static_cast<int>(run.i64("dilation", 2));
  gen.levels = parse_levels(run.str("levels", "atom,bond,motif"));

  std::size_t total_written = 0, total_skipped = 0;
  for (const MaskSweepPoint& pt : points) {
    gen.gamma = pt.gamma;
    gen.render.width = pt.image_size;
    gen.render.height = pt.image_size;
    fs::path dir = pt.subdir.empty() ? fs::path(run.out_dir())
                                     : run.out_path(pt.subdir);
    depict::GenStats stats = depict::generate_samples(
        corpus, av, rules, mv, gen, run.seed(), dir);
    total_written += stats.written;
    total_skipped += stats.skipped;

    std::string prefix = pt.subdir.empty() ? "" : pt.subdir + "/";
    run.add_output(prefix + "manifest.jsonl");
    for (const auto& entry :
         depict::read_manifest(dir / "manifest.jsonl")) {
      run.add_output(prefix + entry.image_path);
    }
  }

  // Per-molecule mask arithmetic, printed for downstream checks. The counts
  // are recomputed from the target lists, which is exactly what the
  // generator sampled from.
  for (const auto& e : corpus) {
    for (depict::MaskLevel level : gen.levels) {
      std::size_t n = 0;
      switch (level) {
        case depict::MaskLevel::kAtom:
          n = depict::build_atom_targets(e.graph, av).size();
          break;
        case depict::MaskLevel::kBond:
          n = depict::build_bond_targets(e.graph).size();
          break;
        case depict::MaskLevel::kMotif:
          n = depict::build_motif_targets(e.graph, rules, mv).size();
          break;
      }
      std::size_t m = 0;
      if (n > 0) {
        m = level == depict::MaskLevel::kMotif
                ? 1
                : depict::mask_count(gamma, n);
      }
      std::cout << "mask-summary id=" << e.id
                << " level=" << depict::mask_level_name(level)
                << " targets=" << n << " masks=" << m << "\n";
    }
  }

  run.finish();
  std::cout << "masks: samples=" << total_written
            << " skipped=" << total_skipped << " sweeps=" << points.size()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// pretrain

template <typename T>
int run_pretrain_t(Run& run, const std::string& manifest_dir,
                   const chem::AtomVocab& av, const frag::MotifVocab& mv) {
  model::EncoderConfig ec;
  ec.image_size = static_cast<int>(run.i64("image-size", 224));
  ec.patch_size = static_cast<int>(run.i64("patch-size", 16));
  ec.embed_dim = static_cast<int>(run.i64("embed-dim", 192));
  ec.depth = static_cast<int>(run.i64("depth", 4));
  ec.heads = static_cast<int>(run.i64("heads", 3));
  ec.mlp_ratio = static_cast<int>(run.i64("mlp-ratio", 4));
  ec.seed = run.seed();

  model::OptimizerConfig opt;
  opt.lr = run.f64("lr", 0.01);
  opt.weight_decay = run.f64("weight-decay", 1e-5);
  opt.momentum = run.f64("momentum", 0.9);
  opt.batch_size = static_cast<int>(run.i64("batch-size", 128));
  int epochs = static_cast<int>(run.i64("epochs", 10));
  double val_fraction = run.f64("val-fraction", 0.05);

  auto entries = depict::read_manifest(fs::path(manifest_dir) /
                                       "manifest.jsonl");
  if (entries.empty()) raise(Errc::kMissingArtifact, "manifest is empty");
  std::vector<model::PretextSample<T>> samples;
  samples.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.patch_size != ec.patch_size) {
      raise(Errc::kConfigInvalid,
            "manifest patch size " + std::to_string(e.patch_size) +
                " != configured " + std::to_string(ec.patch_size));
    }
    samples.push_back(
        model::load_pretext_sample<T>(e, manifest_dir, ec.image_size));
  }

  model::HeadWidths heads{av.size(), depict::kBondClassCount, mv.size(),
                          false};
  model::VitModel<T> m(ec, heads);
  model::PretrainResult res =
      model::pretrain(m, samples, opt, epochs, run.seed(), val_fraction);

  model::save_checkpoint(m, run.out_path("encoder.ckpt").string());
  model::write_train_log_csv(run.out_path("train_log.csv").string(), res.log);
  run.add_output("encoder.ckpt");
  run.add_output("train_log.csv");
  run.finish();
  std::cout << "pretrain: samples=" << samples.size()
            << " best_epoch=" << res.best_epoch << " best_val_acc="
            << cliffmask::fmt_fixed(res.best_score, 4) << "\n";
  return 0;
}

int run_pretrain(Run& run) {
  std::string manifest_dir = run.req("manifest");
  run.add_input((fs::path(manifest_dir) / "manifest.jsonl").string());
  std::string vocab_dir = run.req("vocab-dir");
  std::string ap = (fs::path(vocab_dir) / "atom_vocab.csv").string();
  std::string mp = (fs::path(vocab_dir) / "motif_vocab.csv").string();
  run.add_input(ap);
  run.add_input(mp);
  chem::AtomVocab av = chem::AtomVocab::load_csv(ap);
  frag::MotifVocab mv = frag::MotifVocab::load_csv(mp);
  std::string precision = run.str("precision", "f32");
  return with_dtype(precision, [&](auto tag) {
    return run_pretrain_t<decltype(tag)>(run, manifest_dir, av, mv);
  });
}

// ---------------------------------------------------------------------------
// split

bench::DatasetSplit compute_split(Run& run,
                                  const std::vector<bench::PotencyRecord>& recs,
                                  const std::string& kind) {
  double train_frac = run.f64("train-frac", 0.8);
  double val_frac = run.f64("val-frac", 0.1);
  double test_frac = run.f64("test-frac", 0.1);
  if (kind == "scaffold") {
    return bench::scaffold_split(recs, train_frac, val_frac, test_frac);
  }
  if (kind == "random") {
    return bench::random_split(recs.size(), train_frac, val_frac, test_frac,
                               run.seed());
  }
  if (kind == "stratified") {
    double threshold = run.f64("threshold", 0.9);
    double min_delta = run.f64("min-delta", 1.0);
    double cluster_threshold = run.f64("cluster-threshold", 0.6);
    bench::CliffAnalysis analysis =
        bench::find_cliff_pairs(recs, threshold, min_delta, run.workers());
    return bench::stratified_cluster_split(recs, analysis.is_cliff,
                                           train_frac, run.seed(),
                                           cluster_threshold);
  }
  raise(Errc::kConfigInvalid,
        "kind must be scaffold, stratified, or random, got: " + kind);
}

int run_split(Run& run) {
  bench::IngestResult data = load_dataset(run);
  std::string kind = run.str("kind", "scaffold");
  bench::DatasetSplit split = compute_split(run, data.records, kind);
  bench::write_split_csv(run.out_path("split.csv").string(), data.records,
                         split);
  run.add_output("split.csv");
  run.finish();
  std::cout << "split: kind=" << kind << " train=" << split.train.size()
            << " validation=" << split.validation.size()
            << " test=" << split.test.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// cliffs

int run_cliffs(Run& run) {
  bench::IngestResult data = load_dataset(run);
  double threshold = run.f64("threshold", 0.9);
  double min_delta = run.f64("min-delta", 1.0);
  bench::CliffAnalysis analysis = bench::find_cliff_pairs(
      data.records, threshold, min_delta, run.workers());
  bench::write_cliff_pairs_csv(run.out_path("cliff_pairs.csv").string(),
                               data.records, analysis.pairs);
  run.add_output("cliff_pairs.csv");
  std::size_t n_cliff = 0;
  for (char f : analysis.is_cliff) n_cliff += f ? 1 : 0;
  run.finish();
  std::cout << "cliffs: records=" << data.records.size()
            << " pairs=" << analysis.pairs.size()
            << " cliff_compounds=" << n_cliff << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// finetune

template <typename T>
int run_finetune_t(Run& run) {
  bench::IngestResult data = load_dataset(run);
  const auto& recs = data.records;

  // Split: an explicit file wins; otherwise a scaffold split is computed
  // and persisted so evaluation can reuse it.
  bench::DatasetSplit split;
  std::string split_path = run.str("split", "");
  if (!split_path.empty()) {
    run.add_input(split_path);
    split = bench::read_split_csv(split_path, recs);
  } else {
    split = compute_split(run, recs, run.str("kind", "scaffold"));
    bench::write_split_csv(run.out_path("split.csv").string(), recs, split);
    run.add_output("split.csv");
  }

  model::EncoderConfig ec;
  std::string ckpt = run.str("checkpoint", "");
  model::HeadWidths heads{0, 0, 0, true};
  if (!ckpt.empty()) run.add_input(ckpt);

  ec.image_size = static_cast<int>(run.i64("image-size", 224));
  ec.patch_size = static_cast<int>(run.i64("patch-size", 16));
  ec.embed_dim = static_cast<int>(run.i64("embed-dim", 192));
  ec.depth = static_cast<int>(run.i64("depth", 4));
  ec.heads = static_cast<int>(run.i64("heads", 3));
  ec.mlp_ratio = static_cast<int>(run.i64("mlp-ratio", 4));
  ec.seed = run.seed();
  model::VitModel<T> m(ec, heads);
  if (!ckpt.empty()) {
    int copied = model::warm_start(m, ckpt);
    cliffmask::log_info("warm start: " + std::to_string(copied) +
                        " tensors loaded");
  }

  std::vector<model::RegressionSample<T>> samples;
  samples.reserve(recs.size());
  for (const auto& r : recs) {
    model::RegressionSample<T> s;
    s.id = r.id;
    s.pixels = render_pixels<T>(r.graph, ec.image_size);
    s.pk = r.pk;
    samples.push_back(std::move(s));
  }

  model::OptimizerConfig opt;
  opt.lr = run.f64("lr", 5e-4);
  opt.weight_decay = run.f64("weight-decay", 1e-5);
  opt.momentum = run.f64("momentum", 0.9);
  opt.batch_size = static_cast<int>(run.i64("batch-size", 32));
  model::FinetuneOptions fo;
  fo.max_epochs = static_cast<int>(run.i64("max-epochs", 200));
  fo.patience = static_cast<int>(run.i64("patience", 10));

  model::FinetuneResult res =
      model::finetune(m, samples, split, opt, fo, run.seed());

  model::save_checkpoint(m, run.out_path("model.ckpt").string());
  model::write_train_log_csv(run.out_path("train_log.csv").string(), res.log);
  run.add_output("model.ckpt");
  run.add_output("train_log.csv");

  cliffmask::CsvTable preds;
  preds.header = {"id", "pred", "truth"};
  for (std::size_t k = 0; k < split.test.size(); ++k) {
    const auto& r = recs[static_cast<std::size_t>(split.test[k])];
    preds.rows.push_back({r.id, cliffmask::fmt_double(res.test_pred[k]),
                          cliffmask::fmt_double(res.test_truth[k])});
  }
  cliffmask::write_csv(run.out_path("predictions.csv").string(), preds);
  run.add_output("predictions.csv");

  run.finish();
  std::cout << "finetune: train=" << split.train.size()
            << " validation=" << split.validation.size()
            << " test=" << split.test.size()
            << " best_epoch=" << res.best_epoch << " best_val_rmse="
            << cliffmask::fmt_fixed(res.best_val_rmse, 4) << "\n";
  return 0;
}

int run_finetune(Run& run) {
  std::string precision = run.str("precision", "f32");
  std::string ckpt = run.str("checkpoint", "");
  if (!ckpt.empty()) {
    // The warm-start source fixes the arithmetic type.
    precision = checkpoint_dtype(ckpt);
  }
  return with_dtype(precision,
                    [&](auto tag) { return run_finetune_t<decltype(tag)>(run); });
}

// ---------------------------------------------------------------------------
// eval

int run_eval(Run& run) {
  std::string pred_path = run.req("pred");
  run.add_input(pred_path);
  cliffmask::CsvTable t = cliffmask::read_csv(pred_path);
  int ci = t.require_column("id");
  int cp = t.require_column("pred");
  int ct = t.require_column("truth");

  bench::IngestResult data = load_dataset(run);
  double threshold = run.f64("threshold", 0.9);
  double min_delta = run.f64("min-delta", 1.0);
  bench::CliffAnalysis analysis = bench::find_cliff_pairs(
      data.records, threshold, min_delta, run.workers());
  std::map<std::string, bool> cliff_by_id;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    cliff_by_id[data.records[i].id] = analysis.is_cliff[i] != 0;
  }

  std::vector<double> pred, truth;
  std::vector<char> flags;
  for (const auto& row : t.rows) {
    const std::string& id = row[static_cast<std::size_t>(ci)];
    auto it = cliff_by_id.find(id);
    if (it == cliff_by_id.end()) {
      raise(Errc::kIoError, "prediction id not in dataset: " + id);
    }
    pred.push_back(std::stod(row[static_cast<std::size_t>(cp)]));
    truth.push_back(std::stod(row[static_cast<std::size_t>(ct)]));
    flags.push_back(it->second ? 1 : 0);
  }

  bench::EvalMetrics mtr = bench::evaluate(pred, truth, flags);
  bench::write_metrics_json(run.out_path("metrics.json").string(), mtr);
  run.add_output("metrics.json");
  run.finish();
  std::cout << "eval: n=" << mtr.n << " n_cliff=" << mtr.n_cliff
            << " rmse=" << cliffmask::fmt_fixed(mtr.rmse, 4) << " rmse_cliff="
            << (mtr.rmse_cliff ? cliffmask::fmt_fixed(*mtr.rmse_cliff, 4)
                               : std::string("null"))
            << " mae=" << cliffmask::fmt_fixed(mtr.mae, 4) << " kld="
            << (mtr.kld ? cliffmask::fmt_fixed(*mtr.kld, 4)
                        : std::string("null"))
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// attribute

template <typename T>
int run_attribute_t(Run& run, const std::string& ckpt) {
  model::VitModel<T> m = model::load_checkpoint<T>(ckpt);
  int dilation = static_cast<int>(run.i64("dilation", 2));

  cliffmask::CsvTable out;
  out.header = {"id", "fragment", "atoms", "attribution"};

  std::string single = run.str("smiles", "");
  if (!single.empty()) {
    chem::MoleculeGraph g = chem::parse_smiles(single);
    depict::HighlightTarget target;
    for (const std::string& s : split_list(run.str("atoms", ""))) {
      target.atoms.push_back(std::stoi(s));
    }
    for (const std::string& s : split_list(run.str("bonds", ""))) {
      target.bonds.push_back(std::stoi(s));
    }
    double a = model::sme_attribution(m, g, target, dilation);
    std::string atoms;
    for (std::size_t k = 0; k < target.atoms.size(); ++k) {
      if (k) atoms += "|";
      atoms += std::to_string(target.atoms[k]);
    }
    out.rows.push_back(
        {"query", single, atoms, cliffmask::fmt_double(a)});
    std::cout << "attribute: " << single << " atoms=" << atoms << " effect="
              << cliffmask::fmt_fixed(a, 6) << "\n";
  } else {
    auto corpus = load_corpus(run, run.req("input"));
    frag::CleavageRuleTable rules = load_rules(run);
    int min_atoms = static_cast<int>(run.i64("min-atoms", 1));
    for (const auto& e : corpus) {
      for (const frag::FragmentOccurrence& occ :
           frag::fragment(e.graph, rules)) {
        if (static_cast<int>(occ.atoms.size()) < min_atoms) continue;
        depict::HighlightTarget target;
        target.atoms = occ.atoms;
        target.bonds = occ.bonds;
        double a = model::sme_attribution(m, e.graph, target, dilation);
        std::string atoms;
        for (std::size_t k = 0; k < occ.atoms.size(); ++k) {
          if (k) atoms += "|";
          atoms += std::to_string(occ.atoms[k]);
        }
        out.rows.push_back(
            {e.id, occ.canonical, atoms, cliffmask::fmt_double(a)});
      }
    }
    std::cout << "attribute: molecules=" << corpus.size()
              << " fragments=" << out.rows.size() << "\n";
  }

  cliffmask::write_csv(run.out_path("attributions.csv").string(), out);
  run.add_output("attributions.csv");
  run.finish();
  return 0;
}

int run_attribute(Run& run) {
  std::string ckpt = run.req("checkpoint");
  run.add_input(ckpt);
  return with_dtype(checkpoint_dtype(ckpt), [&](auto tag) {
    return run_attribute_t<decltype(tag)>(run, ckpt);
  });
}

// ---------------------------------------------------------------------------
// embed

template <typename T>
int run_embed_t(Run& run, const std::string& ckpt) {
  model::VitModel<T> m = model::load_checkpoint<T>(ckpt);
  auto corpus = load_corpus(run, run.req("input"));

  std::vector<std::string> ids;
  std::vector<std::vector<T>> images;
  for (const auto& e : corpus) {
    ids.push_back(e.id);
    images.push_back(render_pixels<T>(e.graph, m.config().image_size));
  }
  std::vector<std::vector<double>> feats = model::embed_features(m, images);
  model::write_embeddings_csv(run.out_path("embeddings.csv").string(), ids,
                              feats);
  run.add_output("embeddings.csv");

  if (run.flag("pca", true)) {
    bench::Pca2d pca = bench::pca_2d(feats);
    cliffmask::CsvTable t;
    t.header = {"id", "x", "y"};
    for (std::size_t i = 0; i < ids.size(); ++i) {
      t.rows.push_back({ids[i], cliffmask::fmt_double(pca.points[i].x),
                        cliffmask::fmt_double(pca.points[i].y)});
    }
    cliffmask::write_csv(run.out_path("embeddings_2d.csv").string(), t);
    run.add_output("embeddings_2d.csv");
  }
  run.finish();
  std::cout << "embed: molecules=" << ids.size()
            << " dim=" << (feats.empty() ? 0 : feats[0].size()) << "\n";
  return 0;
}

int run_embed(Run& run) {
  std::string ckpt = run.req("checkpoint");
  run.add_input(ckpt);
  return with_dtype(checkpoint_dtype(ckpt), [&](auto tag) {
    return run_embed_t<decltype(tag)>(run, ckpt);
  });
}

// ---------------------------------------------------------------------------
// collapse

int run_collapse(Run& run) {
  std::string emb_path = run.req("embeddings");
  run.add_input(emb_path);
  cliffmask::CsvTable t = cliffmask::read_csv(emb_path);
  int ci = t.require_column("id");
  int cx = t.require_column("x");
  int cy = t.require_column("y");
  std::map<std::string, bench::Point2> points;
  for (const auto& row : t.rows) {
    points[row[static_cast<std::size_t>(ci)]] = {
        std::stod(row[static_cast<std::size_t>(cx)]),
        std::stod(row[static_cast<std::size_t>(cy)])};
  }

  bench::IngestResult data = load_dataset(run);
  const auto& recs = data.records;
  double min_sim = run.f64("min-sim", 0.0);

  std::vector<bench::CliffFeatures> feats;
  feats.reserve(recs.size());
  for (const auto& r : recs) feats.push_back(bench::cliff_features(r));
  for (const auto& r : recs) {
    if (!points.count(r.id)) {
      raise(Errc::kMissingEmbedding, "no embedding for id: " + r.id);
    }
  }

  std::vector<double> sims, dists;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    for (std::size_t j = i + 1; j < recs.size(); ++j) {
      double s = bench::similarity_triad(feats[i], feats[j]).max();
      if (s < min_sim) continue;
      sims.push_back(s);
      dists.push_back(
          bench::euclidean(points.at(recs[i].id), points.at(recs[j].id)));
    }
  }
  std::vector<bench::CollapseBin> bins = bench::collapse_curve(sims, dists);
  cliffmask::CsvTable curve;
  curve.header = {"bin_lo", "bin_hi", "center", "mean_distance", "count"};
  for (const auto& b : bins) {
    curve.rows.push_back(
        {cliffmask::fmt_double(b.lo), cliffmask::fmt_double(b.hi),
         cliffmask::fmt_double(b.center), cliffmask::fmt_double(b.mean_distance),
         std::to_string(b.count)});
  }
  cliffmask::write_csv(run.out_path("collapse.csv").string(), curve);
  run.add_output("collapse.csv");

  nlohmann::json summary;
  summary["n_pairs"] = sims.size();
  summary["min_sim"] = min_sim;
  std::string pairs_path = run.str("pairs", "");
  if (!pairs_path.empty()) {
    run.add_input(pairs_path);
    cliffmask::CsvTable pt = cliffmask::read_csv(pairs_path);
    int pi = pt.require_column("i");
    int pj = pt.require_column("j");
    std::vector<std::pair<std::string, std::string>> id_pairs;
    for (const auto& row : pt.rows) {
      id_pairs.emplace_back(row[static_cast<std::size_t>(pi)],
                            row[static_cast<std::size_t>(pj)]);
    }
    if (id_pairs.empty()) {
      summary["cliff_distance"] = nullptr;
    } else {
      summary["cliff_distance"] = bench::cliff_distance(points, id_pairs);
    }
  } else {
    summary["cliff_distance"] = nullptr;
  }
  {
    std::ofstream out(run.out_path("collapse_summary.json"),
                      std::ios::binary);
    out << summary.dump(2) << "\n";
  }
  run.add_output("collapse_summary.json");
  run.finish();
  std::cout << "collapse: pairs=" << sims.size() << " bins=" << bins.size()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Wiring.

struct SubSpec {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> flag_values;
  std::set<std::string> known_keys;
  int (*runner)(Run&) = nullptr;
};

void add_key(SubSpec* spec, const std::string& key, const std::string& help) {
  spec->known_keys.insert(key);
  CLI::Option* o = spec->app->add_option("--" + key, help);
  auto* values = &spec->flag_values;
  o->each([values, key](const std::string& v) { (*values)[key] = v; });
}

void add_common(SubSpec* spec) {
  spec->app->add_option("--config", spec->config_path,
                        "key=value config file merged under flags");
  add_key(spec, "out", "output directory (default cliffmask_out)");
  add_key(spec, "seed", "master random seed (default 0)");
  add_key(spec, "workers", "worker thread bound (default 1)");
}

void add_dataset_keys(SubSpec* spec) {
  add_key(spec, "input", "dataset CSV");
  add_key(spec, "unit", "potency unit: pk or nm (default pk)");
  add_key(spec, "id-col", "id column name (default id)");
  add_key(spec, "smiles-col", "SMILES column name (default smiles)");
  add_key(spec, "value-col", "potency column (default y, or exp_mean_nm)");
  add_key(spec, "split-col", "optional split tag column (default split)");
}

int dispatch(const SubSpec& spec, const std::string& name) {
  // Resolve the output directory before anything can fail, so even
  // configuration errors leave a machine-readable report behind.
  std::string out_dir = "cliffmask_out";
  auto out_flag = spec.flag_values.find("out");
  if (out_flag != spec.flag_values.end()) out_dir = out_flag->second;

  try {
    Config cfg;
    if (!spec.config_path.empty()) {
      cfg = Config::from_file(spec.config_path);
    }
    for (const auto& [k, v] : spec.flag_values) cfg.set(k, v);
    if (out_flag == spec.flag_values.end()) {
      out_dir = cfg.get_str("out", out_dir);
    }
    cfg.validate_keys(spec.known_keys);

    Run run(name, std::move(cfg));
    run.begin();
    return spec.runner(run);
  } catch (const cliffmask::Error& e) {
    nlohmann::json rep;
    rep["error"] = cliffmask::errc_name(e.code());
    rep["message"] = e.what();
    if (e.offset() >= 0) rep["offset"] = e.offset();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream out(fs::path(out_dir) / "error_report.json",
                      std::ios::binary);
    out << rep.dump(2) << "\n";
    throw;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cliffmask: knowledge-guided masking, pretraining, and "
               "activity-cliff evaluation for 2D molecular images"};
  app.require_subcommand(1);

  std::vector<SubSpec> specs(10);
  auto make = [&](int idx, const std::string& name, const std::string& help,
                  int (*runner)(Run&)) -> SubSpec* {
    SubSpec* s = &specs[static_cast<std::size_t>(idx)];
    s->app = app.add_subcommand(name, help);
    s->runner = runner;
    add_common(s);
    return s;
  };

  SubSpec* vocab = make(0, "vocab", "build atom and motif vocabularies",
                        run_vocab);
  add_key(vocab, "input", "corpus CSV with SMILES");
  add_key(vocab, "id-col", "id column name (default id)");
  add_key(vocab, "smiles-col", "SMILES column name (default smiles)");
  add_key(vocab, "atom-k", "max atom classes (default 10)");
  add_key(vocab, "motif-k", "max motif classes (default 200)");
  add_key(vocab, "min-atoms", "min fragment size for motifs (default 3)");
  add_key(vocab, "rules", "cleavage rule file (default: built-in table)");

  SubSpec* masks = make(1, "masks", "render masked pretraining samples",
                        run_masks);
  add_key(masks, "input", "corpus CSV with SMILES");
  add_key(masks, "id-col", "id column name (default id)");
  add_key(masks, "smiles-col", "SMILES column name (default smiles)");
  add_key(masks, "vocab-dir", "directory with saved vocabularies");
  add_key(masks, "atom-k", "max atom classes when building ad hoc");
  add_key(masks, "motif-k", "max motif classes when building ad hoc");
  add_key(masks, "min-atoms", "min fragment size when building ad hoc");
  add_key(masks, "rules", "cleavage rule file (default: built-in table)");
  add_key(masks, "gamma", "mask ratio (default 0.5)");
  add_key(masks, "gamma-list", "comma list of mask ratios to sweep");
  add_key(masks, "image-size", "square image edge (default 224)");
  add_key(masks, "image-size-list", "comma list of image sizes to sweep");
  add_key(masks, "patch-size", "transformer patch edge (default 16)");
  add_key(masks, "dilation", "mask dilation radius in px (default 2)");
  add_key(masks, "levels", "comma list of atom,bond,motif (default all)");

  SubSpec* pretrain = make(2, "pretrain", "train the encoder on masked tasks",
                           run_pretrain);
  add_key(pretrain, "manifest", "directory containing manifest.jsonl");
  add_key(pretrain, "vocab-dir", "directory with saved vocabularies");
  add_key(pretrain, "image-size", "square image edge (default 224)");
  add_key(pretrain, "patch-size", "patch edge (default 16)");
  add_key(pretrain, "embed-dim", "embedding width (default 192)");
  add_key(pretrain, "depth", "transformer blocks (default 4)");
  add_key(pretrain, "heads", "attention heads (default 3)");
  add_key(pretrain, "mlp-ratio", "MLP expansion (default 4)");
  add_key(pretrain, "lr", "learning rate (default 0.01)");
  add_key(pretrain, "weight-decay", "decoupled weight decay (default 1e-5)");
  add_key(pretrain, "momentum", "SGD momentum (default 0.9)");
  add_key(pretrain, "batch-size", "batch size (default 128)");
  add_key(pretrain, "epochs", "training epochs (default 10)");
  add_key(pretrain, "val-fraction", "validation share (default 0.05)");
  add_key(pretrain, "precision", "f32 or f64 (default f32)");

  SubSpec* finetune = make(3, "finetune", "fit the potency regression head",
                           run_finetune);
  add_dataset_keys(finetune);
  add_key(finetune, "split", "split.csv from the split subcommand");
  add_key(finetune, "kind", "split kind when none given (default scaffold)");
  add_key(finetune, "train-frac", "train fraction (default 0.8)");
  add_key(finetune, "val-frac", "validation fraction (default 0.1)");
  add_key(finetune, "test-frac", "test fraction (default 0.1)");
  add_key(finetune, "threshold", "cliff similarity cut (default 0.9)");
  add_key(finetune, "min-delta", "cliff potency gap (default 1.0)");
  add_key(finetune, "cluster-threshold", "leader cluster cut (default 0.6)");
  add_key(finetune, "checkpoint", "pretrained encoder to warm start from");
  add_key(finetune, "image-size", "square image edge (default 224)");
  add_key(finetune, "patch-size", "patch edge (default 16)");
  add_key(finetune, "embed-dim", "embedding width (default 192)");
  add_key(finetune, "depth", "transformer blocks (default 4)");
  add_key(finetune, "heads", "attention heads (default 3)");
  add_key(finetune, "mlp-ratio", "MLP expansion (default 4)");
  add_key(finetune, "lr", "learning rate (default 5e-4)");
  add_key(finetune, "weight-decay", "decoupled weight decay (default 1e-5)");
  add_key(finetune, "momentum", "SGD momentum (default 0.9)");
  add_key(finetune, "batch-size", "batch size (default 32)");
  add_key(finetune, "max-epochs", "epoch cap (default 200)");
  add_key(finetune, "patience", "early-stop patience (default 10)");
  add_key(finetune, "precision", "f32 or f64 when training fresh");

  SubSpec* eval = make(4, "eval", "score predictions against the benchmark",
                       run_eval);
  add_dataset_keys(eval);
  add_key(eval, "pred", "predictions CSV (id,pred,truth)");
  add_key(eval, "threshold", "cliff similarity cut (default 0.9)");
  add_key(eval, "min-delta", "cliff potency gap (default 1.0)");

  SubSpec* cliffs = make(5, "cliffs", "mine activity-cliff pairs", run_cliffs);
  add_dataset_keys(cliffs);
  add_key(cliffs, "threshold", "cliff similarity cut (default 0.9)");
  add_key(cliffs, "min-delta", "cliff potency gap (default 1.0)");

  SubSpec* split = make(6, "split", "partition a dataset", run_split);
  add_dataset_keys(split);
  add_key(split, "kind", "scaffold, stratified, or random (default scaffold)");
  add_key(split, "train-frac", "train fraction (default 0.8)");
  add_key(split, "val-frac", "validation fraction (default 0.1)");
  add_key(split, "test-frac", "test fraction (default 0.1)");
  add_key(split, "threshold", "cliff similarity cut (default 0.9)");
  add_key(split, "min-delta", "cliff potency gap (default 1.0)");
  add_key(split, "cluster-threshold", "leader cluster cut (default 0.6)");

  SubSpec* attribute = make(7, "attribute",
                            "substructure effects via masked re-prediction",
                            run_attribute);
  add_key(attribute, "checkpoint", "regression checkpoint");
  add_key(attribute, "input", "corpus CSV (fragment every molecule)");
  add_key(attribute, "id-col", "id column name (default id)");
  add_key(attribute, "smiles-col", "SMILES column name (default smiles)");
  add_key(attribute, "smiles", "single query SMILES instead of a corpus");
  add_key(attribute, "atoms", "comma list of atom indices (single mode)");
  add_key(attribute, "bonds", "comma list of bond indices (single mode)");
  add_key(attribute, "rules", "cleavage rule file (default: built-in table)");
  add_key(attribute, "min-atoms", "min fragment size (default 1)");
  add_key(attribute, "dilation", "mask dilation radius in px (default 2)");

  SubSpec* embed = make(8, "embed", "export cls features", run_embed);
  add_key(embed, "checkpoint", "encoder or model checkpoint");
  add_key(embed, "input", "corpus CSV with SMILES");
  add_key(embed, "id-col", "id column name (default id)");
  add_key(embed, "smiles-col", "SMILES column name (default smiles)");
  add_key(embed, "pca", "also write a 2D projection (default true)");

  SubSpec* collapse = make(9, "collapse",
                           "similarity-vs-distance curve over an embedding",
                           run_collapse);
  add_dataset_keys(collapse);
  add_key(collapse, "embeddings", "embeddings_2d.csv from the embed step");
  add_key(collapse, "pairs", "optional cliff_pairs.csv for pair distance");
  add_key(collapse, "min-sim", "drop pairs below this similarity (default 0)");

  CLI11_PARSE(app, argc, argv);

  static const char* kNames[] = {"vocab",  "masks", "pretrain", "finetune",
                                 "eval",   "cliffs", "split",    "attribute",
                                 "embed",  "collapse"};
  try {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (specs[i].app->parsed()) return dispatch(specs[i], kNames[i]);
    }
  } catch (const cliffmask::Error& e) {
    std::cerr << "error: " << cliffmask::errc_name(e.code()) << ": "
              << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
