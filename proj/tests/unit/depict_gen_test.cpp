//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#include "cliffmask/depict/sample_gen.hpp"

#include <filesystem>
#include <fstream>

#include "cliffmask/chem/smiles.hpp"
#include "support/catch.hpp"

using namespace cliffmask;
using namespace cliffmask::depict;
using cliffmask::chem::AtomVocab;
using cliffmask::chem::parse_smiles;
using cliffmask::frag::CleavageRuleTable;
using cliffmask::frag::MotifVocab;
using cliffmask::testing::expect_error;

namespace fs = std::filesystem;

namespace {

struct Fixture {
  std::vector<CorpusEntry> corpus;
  AtomVocab atom_vocab;
  CleavageRuleTable rules = CleavageRuleTable::from_text("ring=1 -- ring=0\n");
  MotifVocab motif_vocab;

  Fixture() {
    for (auto [id, smi] : std::initializer_list<std::pair<const char*,
                                                          const char*>>{
             {"tol1", "Cc1ccccc1"},
             {"pyr1", "c1ccncc1"},
             {"eth1", "CCO"},
             {"met1", "C"}}) {
      CorpusEntry e;
      e.id = id;
      e.smiles = smi;
      e.graph = parse_smiles(smi);
      corpus.push_back(std::move(e));
    }
    std::vector<chem::MoleculeGraph> graphs;
    for (const auto& e : corpus) graphs.push_back(e.graph);
    atom_vocab = AtomVocab::build(graphs);
    motif_vocab = MotifVocab::build(graphs, rules, 10, 3);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("build_sample produces coherent patch metadata", "[samplegen]") {
  Fixture f;
  SampleGenConfig cfg;
  cfg.render.width = cfg.render.height = 128;
  cfg.patch_size = 16;

  BuiltSample atom = build_sample(f.corpus[0], MaskLevel::kAtom, f.atom_vocab,
                                  f.rules, f.motif_vocab, cfg, 99);
  CHECK(atom.meta.task == "ampp");
  CHECK_FALSE(atom.meta.omega.empty());
  CHECK(atom.meta.labels.size() == atom.meta.omega.size());
  for (int p : atom.meta.omega) {
    CHECK(p >= 0);
    CHECK(p < 64);  // 128/16 squared
  }
  for (int lbl : atom.meta.labels) {
    CHECK(lbl >= 0);
    CHECK(lbl < static_cast<int>(f.atom_vocab.size()));
  }

  BuiltSample motif = build_sample(f.corpus[0], MaskLevel::kMotif,
                                   f.atom_vocab, f.rules, f.motif_vocab, cfg,
                                   99);
  CHECK(motif.meta.task == "mmpp");
  CHECK(motif.meta.labels.size() == 1);  // one class for the whole sample
  CHECK_FALSE(motif.meta.omega.empty());
}

TEST_CASE("masking whitens pixels and only masked pixels differ",
          "[samplegen]") {
  Fixture f;
  SampleGenConfig cfg;
  cfg.render.width = cfg.render.height = 128;
  cfg.gamma = 1.0;

  BuiltSample s = build_sample(f.corpus[0], MaskLevel::kAtom, f.atom_vocab,
                               f.rules, f.motif_vocab, cfg, 5);
  Layout lay = layout_2d(f.corpus[0].graph);
  RenderResult clean = render(f.corpus[0].graph, lay, cfg.render);

  int diffs = 0;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      if (!(s.masked_image.get(x, y) == clean.image.get(x, y))) {
        ++diffs;
        CHECK(s.masked_image.get(x, y) == kWhite);
      }
    }
  }
  CHECK(diffs > 0);  // gamma 1.0 erases ink under every atom disc
}

TEST_CASE("generate_samples writes an ordered manifest and skips gaps",
          "[samplegen]") {
  Fixture f;
  SampleGenConfig cfg;
  cfg.render.width = cfg.render.height = 128;

  fs::path dir = fs::temp_directory_path() / "cliffmask_gen_test";
  fs::remove_all(dir);
  GenStats stats = generate_samples(f.corpus, f.atom_vocab, f.rules,
                                    f.motif_vocab, cfg, 42, dir);
  // methane has no bonds (bmpp) and no vocab motif (mmpp)
  CHECK(stats.written == 10);
  CHECK(stats.skipped == 2);

  std::vector<ManifestEntry> entries = read_manifest(dir / "manifest.jsonl");
  REQUIRE(entries.size() == 10);
  std::vector<std::pair<std::string, std::string>> got;
  for (const auto& e : entries) got.push_back({e.molecule_id, e.task});
  std::vector<std::pair<std::string, std::string>> want = {
      {"tol1", "ampp"}, {"tol1", "bmpp"}, {"tol1", "mmpp"},
      {"pyr1", "ampp"}, {"pyr1", "bmpp"}, {"pyr1", "mmpp"},
      {"eth1", "ampp"}, {"eth1", "bmpp"}, {"eth1", "mmpp"},
      {"met1", "ampp"}};
  CHECK(got == want);

  for (const auto& e : entries) {
    CHECK(e.patch_size == 16);
    CHECK(e.dilation == 2);
    CHECK(e.gamma == 0.5);
    CHECK_FALSE(e.omega.empty());
    DecodedPng png = png_read_file((dir / e.image_path).string());
    CHECK(png.width == 128);
    CHECK(png.height == 128);
  }

  // byte-identical regeneration under the same seed
  fs::path dir2 = fs::temp_directory_path() / "cliffmask_gen_test2";
  fs::remove_all(dir2);
  generate_samples(f.corpus, f.atom_vocab, f.rules, f.motif_vocab, cfg, 42,
                   dir2);
  CHECK(slurp(dir / "manifest.jsonl") == slurp(dir2 / "manifest.jsonl"));
  CHECK(slurp(dir / "tol1_ampp.png") == slurp(dir2 / "tol1_ampp.png"));
  CHECK(slurp(dir / "eth1_mmpp.png") == slurp(dir2 / "eth1_mmpp.png"));

  // a different seed must change at least the sampled indices somewhere
  fs::path dir3 = fs::temp_directory_path() / "cliffmask_gen_test3";
  fs::remove_all(dir3);
  generate_samples(f.corpus, f.atom_vocab, f.rules, f.motif_vocab, cfg, 43,
                   dir3);
  CHECK(slurp(dir / "manifest.jsonl") != slurp(dir3 / "manifest.jsonl"));

  fs::remove_all(dir);
  fs::remove_all(dir2);
  fs::remove_all(dir3);
}
