//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_DEPICT_SAMPLE_GEN_HPP
#define CLIFFMASK_DEPICT_SAMPLE_GEN_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cliffmask/chem/atom_vocab.hpp"
#include "cliffmask/chem/molecule.hpp"
#include "cliffmask/core/error.hpp"
#include "cliffmask/core/log.hpp"
#include "cliffmask/core/rng.hpp"
#include "cliffmask/depict/layout.hpp"
#include "cliffmask/depict/mask.hpp"
#include "cliffmask/depict/png_io.hpp"
#include "cliffmask/depict/render.hpp"
#include "cliffmask/frag/fragment.hpp"

namespace cliffmask::depict {

struct CorpusEntry {
  std::string id;
  std::string smiles;
  chem::MoleculeGraph graph;
};

struct SampleGenConfig {
  RenderConfig render;
  int patch_size = 16;
  double gamma = 0.5;
  int dilation = 2;
  std::vector<MaskLevel> levels = {MaskLevel::kAtom, MaskLevel::kBond,
                                   MaskLevel::kMotif};
};

struct ManifestEntry {
  std::string molecule_id;
  std::string smiles;
  std::string task;
  std::string image_path;  // relative to the manifest's directory
  int patch_size = 16;
  std::vector<int> omega;
  std::vector<int> labels;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  int dilation = 0;
};

struct GenStats {
  std::size_t written = 0;
  std::size_t skipped = 0;
};

namespace detail {

inline nlohmann::json manifest_json(const ManifestEntry& e) {
  nlohmann::json j;
  j["molecule_id"] = e.molecule_id;
  j["smiles"] = e.smiles;
  j["task"] = e.task;
  j["image_path"] = e.image_path;
  j["patch_size"] = e.patch_size;
  j["omega"] = e.omega;
  j["labels"] = e.labels;
  j["gamma"] = e.gamma;
  j["seed"] = e.seed;
  j["dilation"] = e.dilation;
  return j;
}

}  // namespace detail

// Builds one masked training sample: the clean depiction with the sampled
// highlight regions whitened out, plus the patch/label bookkeeping.
struct BuiltSample {
  RasterImage masked_image;
  ManifestEntry meta;
};

inline BuiltSample build_sample(const CorpusEntry& entry, MaskLevel level,
                                const chem::AtomVocab& atom_vocab,
                                const frag::CleavageRuleTable& rules,
                                const frag::MotifVocab& motif_vocab,
                                const SampleGenConfig& cfg,
                                std::uint64_t sample_seed) {
  const chem::MoleculeGraph& g = entry.graph;
  Layout lay = layout_2d(g);

  std::vector<MaskTargetSpec> targets;
  switch (level) {
    case MaskLevel::kAtom:
      targets = build_atom_targets(g, atom_vocab);
      break;
    case MaskLevel::kBond:
      targets = build_bond_targets(g);
      break;
    case MaskLevel::kMotif:
      targets = build_motif_targets(g, rules, motif_vocab);
      break;
  }

  Rng rng(sample_seed);
  std::vector<std::size_t> chosen =
      sample_mask_indices(targets.size(), cfg.gamma, level, rng);

  std::vector<HighlightTarget> regions;
  std::vector<int> labels;
  for (std::size_t i : chosen) {
    regions.push_back(targets[i].region);
    labels.push_back(targets[i].label);
  }

  RenderResult lit = render(g, lay, cfg.render, &regions);
  Bitmap extracted = extract_green_mask(lit.image, cfg.dilation);
  std::vector<Bitmap> truths;
  truths.reserve(lit.painted.size());
  for (const Bitmap& p : lit.painted) truths.push_back(p.dilated(cfg.dilation));
  PatchAssignment patches =
      assign_patches(extracted, truths, labels, cfg.patch_size);

  RenderResult clean = render(g, lay, cfg.render);
  BuiltSample out;
  out.masked_image = apply_masks(clean.image, {extracted});
  out.meta.molecule_id = entry.id;
  out.meta.smiles = entry.smiles;
  out.meta.task = mask_level_name(level);
  out.meta.image_path = entry.id + "_" + mask_level_name(level) + ".png";
  out.meta.patch_size = cfg.patch_size;
  out.meta.omega = patches.omega;
  out.meta.labels = level == MaskLevel::kMotif
                        ? std::vector<int>{labels[0]}
                        : patches.labels;
  out.meta.gamma = cfg.gamma;
  out.meta.seed = sample_seed;
  out.meta.dilation = cfg.dilation;
  return out;
}

// Writes `<id>_<task>.png` files plus `manifest.jsonl` into out_dir.
// Molecules that cannot produce a given task (no motif in vocabulary,
// layout failure, ...) are skipped with a warning.
inline GenStats generate_samples(const std::vector<CorpusEntry>& corpus,
                                 const chem::AtomVocab& atom_vocab,
                                 const frag::CleavageRuleTable& rules,
                                 const frag::MotifVocab& motif_vocab,
                                 const SampleGenConfig& cfg,
                                 std::uint64_t seed,
                                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream manifest(out_dir / "manifest.jsonl",
                         std::ios::binary | std::ios::trunc);
  if (!manifest) {
    raise(Errc::kIoError, "cannot open manifest for writing");
  }
  GenStats stats;
  for (std::size_t mi = 0; mi < corpus.size(); ++mi) {
    for (MaskLevel level : cfg.levels) {
      std::uint64_t sample_seed = Rng::derive_seed(
          seed, static_cast<std::uint64_t>(mi),
          static_cast<std::uint64_t>(level));
      try {
        BuiltSample s = build_sample(corpus[mi], level, atom_vocab, rules,
                                     motif_vocab, cfg, sample_seed);
        png_write_file((out_dir / s.meta.image_path).string(),
                       s.masked_image.rgb.data(), s.masked_image.width,
                       s.masked_image.height);
        manifest << detail::manifest_json(s.meta).dump() << '\n';
        ++stats.written;
      } catch (const Error& e) {
        log_warn(std::string("skip ") + corpus[mi].id + " " +
                       mask_level_name(level) + ": " + e.what());
        ++stats.skipped;
      }
    }
  }
  manifest.flush();
  if (!manifest) raise(Errc::kIoError, "manifest write failed");
  return stats;
}

inline std::vector<ManifestEntry> read_manifest(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::kIoError, "cannot open manifest: " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      raise(Errc::kIoError, "manifest line is not valid JSON");
    }
    ManifestEntry e;
    e.molecule_id = j.at("molecule_id").get<std::string>();
    e.smiles = j.at("smiles").get<std::string>();
    e.task = j.at("task").get<std::string>();
    e.image_path = j.at("image_path").get<std::string>();
    e.patch_size = j.at("patch_size").get<int>();
    e.omega = j.at("omega").get<std::vector<int>>();
    e.labels = j.at("labels").get<std::vector<int>>();
    e.gamma = j.at("gamma").get<double>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.dilation = j.at("dilation").get<int>();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace cliffmask::depict

#endif  // CLIFFMASK_DEPICT_SAMPLE_GEN_HPP
