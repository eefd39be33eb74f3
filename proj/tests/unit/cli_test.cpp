//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end exercises of the command-line binary. These shell out to the
// built executable, so they cover flag parsing, config merging, artifact
// layout, and the run-record contract rather than re-testing module logic.
//

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "../support/catch.hpp"
#include "cliffmask/core/digest.hpp"

namespace fs = std::filesystem;

namespace {

const char* kCli = CLIFFMASK_CLI_BIN;

struct CliResult {
  int code = -1;
  std::string output;  // stdout + stderr interleaved
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(kCli) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult res;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) res.output += buf;
  int status = pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string corpus_csv() {
  return "id,smiles\n"
         "benzene,c1ccccc1\n"
         "toluene,Cc1ccccc1\n"
         "pyridine,c1ccncc1\n"
         "ethylbenzene,CCc1ccccc1\n";
}

std::string potency_csv() {
  return "id,smiles,y\n"
         "benzene,c1ccccc1,5.0\n"
         "toluene,Cc1ccccc1,6.0\n"
         "pyridine,c1ccncc1,7.0\n"
         "ethylbenzene,CCc1ccccc1,5.5\n"
         "phenol,Oc1ccccc1,6.5\n";
}

// Relative path -> content digest for every regular file under root.
std::map<std::string, std::string> tree_digests(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    out[fs::relative(entry.path(), root).string()] =
        cliffmask::sha256_file_hex(entry.path().string());
  }
  return out;
}

}  // namespace

TEST_CASE("cli vocab writes artifacts and a run record", "[cli]") {
  fs::path dir = fresh_dir("cliffmask_cli_vocab");
  write_file(dir / "corpus.csv", corpus_csv());
  fs::path out = dir / "out";

  CliResult res = run_cli("vocab --input " + (dir / "corpus.csv").string() +
                          " --out " + out.string());
  INFO(res.output);
  REQUIRE(res.code == 0);
  CHECK(fs::exists(out / "atom_vocab.csv"));
  CHECK(fs::exists(out / "motif_vocab.csv"));
  CHECK(res.output.find("atom_classes=") != std::string::npos);

  std::ifstream rec(out / "run_record.json");
  nlohmann::json j = nlohmann::json::parse(rec);
  CHECK(j.at("subcommand") == "vocab");
  CHECK(j.at("config_sha256").get<std::string>().size() == 64);
  CHECK(j.at("inputs").size() >= 1);
  CHECK(j.at("outputs").contains("atom_vocab.csv"));

  std::ifstream eff(out / "effective_config.txt");
  std::string text((std::istreambuf_iterator<char>(eff)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("atom-k=10") != std::string::npos);
  CHECK(text.find("seed=0") != std::string::npos);
}

TEST_CASE("cli masks reports mask arithmetic per molecule", "[cli]") {
  fs::path dir = fresh_dir("cliffmask_cli_masks");
  write_file(dir / "benzene.csv", "id,smiles\nbenzene,c1ccccc1\n");
  fs::path out = dir / "out";

  CliResult res = run_cli("masks --input " + (dir / "benzene.csv").string() +
                          " --out " + out.string() +
                          " --gamma 0.5 --levels atom --image-size 64");
  INFO(res.output);
  REQUIRE(res.code == 0);
  CHECK(res.output.find(
            "mask-summary id=benzene level=ampp targets=6 masks=3") !=
        std::string::npos);

  std::ifstream manifest(out / "manifest.jsonl");
  int lines = 0;
  std::string line;
  while (std::getline(manifest, line)) {
    if (!line.empty()) ++lines;
  }
  CHECK(lines == 1);
}

TEST_CASE("cli masks reruns are byte-identical", "[cli]") {
  fs::path dir = fresh_dir("cliffmask_cli_masks_rerun");
  write_file(dir / "corpus.csv", corpus_csv());
  fs::path out = dir / "out";
  std::string args = "masks --input " + (dir / "corpus.csv").string() +
                     " --out " + out.string() +
                     " --seed 7 --image-size 64 --patch-size 16";

  REQUIRE(run_cli(args).code == 0);
  auto first = tree_digests(out);
  fs::remove_all(out);
  REQUIRE(run_cli(args).code == 0);
  auto second = tree_digests(out);
  CHECK(first == second);
  CHECK(first.count("run_record.json") == 1);
}

TEST_CASE("cli rejects unknown config keys with an error report", "[cli]") {
  fs::path dir = fresh_dir("cliffmask_cli_badkey");
  write_file(dir / "data.csv", potency_csv());
  write_file(dir / "bad.cfg", "bogus-key=1\n");
  fs::path out = dir / "out";

  CliResult res = run_cli("cliffs --config " + (dir / "bad.cfg").string() +
                          " --input " + (dir / "data.csv").string() +
                          " --out " + out.string());
  CHECK(res.code != 0);
  REQUIRE(fs::exists(out / "error_report.json"));
  std::ifstream rep(out / "error_report.json");
  nlohmann::json j = nlohmann::json::parse(rep);
  CHECK(j.at("error") == "ConfigInvalid");
  CHECK(j.at("message").get<std::string>().find("bogus-key") !=
        std::string::npos);
}

TEST_CASE("cli cliffs finds an engineered pair", "[cli]") {
  fs::path dir = fresh_dir("cliffmask_cli_cliffs");
  // The two alkanes differ by one character (string similarity 11/12) and
  // by two potency units; benzene is far from both.
  write_file(dir / "data.csv",
             "id,smiles,y\n"
             "undecane,CCCCCCCCCCC,5.0\n"
             "dodecane,CCCCCCCCCCCC,7.0\n"
             "benzene,c1ccccc1,5.1\n");
  fs::path out = dir / "out";

  CliResult res = run_cli("cliffs --input " + (dir / "data.csv").string() +
                          " --out " + out.string());
  INFO(res.output);
  REQUIRE(res.code == 0);
  CHECK(res.output.find("pairs=1") != std::string::npos);

  std::ifstream pairs(out / "cliff_pairs.csv");
  std::string header, row, extra;
  REQUIRE(std::getline(pairs, header));
  REQUIRE(std::getline(pairs, row));
  CHECK(!std::getline(pairs, extra));
  CHECK(header == "i,j,criteria,delta_pk");
  CHECK(row.find("undecane") != std::string::npos);
  CHECK(row.find("dodecane") != std::string::npos);
  CHECK(row.find("smiles") != std::string::npos);
}

TEST_CASE("cli pipeline runs end to end on a desk corpus", "[cli]") {
  fs::path dir = fresh_dir("cliffmask_cli_pipeline");
  write_file(dir / "corpus.csv", corpus_csv());
  write_file(dir / "data.csv", potency_csv());
  std::string common = " --image-size 64 --patch-size 16";

  fs::path vocab_out = dir / "vocab";
  REQUIRE(run_cli("vocab --input " + (dir / "corpus.csv").string() +
                  " --out " + vocab_out.string() + " --min-atoms 3")
              .code == 0);

  fs::path masks_out = dir / "masks";
  REQUIRE(run_cli("masks --input " + (dir / "corpus.csv").string() +
                  " --vocab-dir " + vocab_out.string() + " --out " +
                  masks_out.string() + common)
              .code == 0);

  fs::path pre_out = dir / "pre";
  std::string pre_args =
      "pretrain --manifest " + masks_out.string() + " --vocab-dir " +
      vocab_out.string() + " --out " + pre_out.string() + common +
      " --embed-dim 8 --depth 1 --heads 2 --mlp-ratio 2 --epochs 1" +
      " --batch-size 8 --precision f64 --seed 11";
  CliResult pre = run_cli(pre_args);
  INFO(pre.output);
  REQUIRE(pre.code == 0);
  REQUIRE(fs::exists(pre_out / "encoder.ckpt"));
  CHECK(fs::exists(pre_out / "train_log.csv"));

  SECTION("pretraining reruns produce byte-identical checkpoints") {
    fs::path pre2 = dir / "pre2";
    std::string again = pre_args;
    auto at = again.find(pre_out.string());
    again.replace(at, pre_out.string().size(), pre2.string());
    REQUIRE(run_cli(again).code == 0);
    CHECK(cliffmask::sha256_file_hex((pre_out / "encoder.ckpt").string()) ==
          cliffmask::sha256_file_hex((pre2 / "encoder.ckpt").string()));
  }

  SECTION("finetune, eval, embed, collapse, attribute chain") {
    fs::path ft_out = dir / "ft";
    CliResult ft = run_cli(
        "finetune --input " + (dir / "data.csv").string() + " --out " +
        ft_out.string() + " --checkpoint " +
        (pre_out / "encoder.ckpt").string() +
        " --kind random --train-frac 0.6 --val-frac 0.2 --test-frac 0.2" +
        " --max-epochs 1 --batch-size 4 --seed 3" + common +
        " --embed-dim 8 --depth 1 --heads 2 --mlp-ratio 2");
    INFO(ft.output);
    REQUIRE(ft.code == 0);
    REQUIRE(fs::exists(ft_out / "model.ckpt"));
    REQUIRE(fs::exists(ft_out / "predictions.csv"));
    CHECK(fs::exists(ft_out / "split.csv"));

    fs::path eval_out = dir / "eval";
    CliResult ev = run_cli("eval --pred " +
                           (ft_out / "predictions.csv").string() +
                           " --input " + (dir / "data.csv").string() +
                           " --out " + eval_out.string());
    INFO(ev.output);
    REQUIRE(ev.code == 0);
    std::ifstream mf(eval_out / "metrics.json");
    nlohmann::json metrics = nlohmann::json::parse(mf);
    CHECK(metrics.contains("rmse"));
    CHECK(metrics.contains("rmse_cliff"));
    CHECK(metrics.contains("kld"));
    CHECK(metrics.at("n").get<int>() == 1);

    fs::path emb_out = dir / "emb";
    CliResult em = run_cli("embed --checkpoint " +
                           (ft_out / "model.ckpt").string() + " --input " +
                           (dir / "data.csv").string() + " --out " +
                           emb_out.string());
    INFO(em.output);
    REQUIRE(em.code == 0);
    REQUIRE(fs::exists(emb_out / "embeddings.csv"));
    REQUIRE(fs::exists(emb_out / "embeddings_2d.csv"));

    fs::path col_out = dir / "col";
    CliResult co = run_cli("collapse --embeddings " +
                           (emb_out / "embeddings_2d.csv").string() +
                           " --input " + (dir / "data.csv").string() +
                           " --out " + col_out.string());
    INFO(co.output);
    REQUIRE(co.code == 0);
    CHECK(fs::exists(col_out / "collapse.csv"));
    std::ifstream sf(col_out / "collapse_summary.json");
    nlohmann::json summary = nlohmann::json::parse(sf);
    CHECK(summary.at("n_pairs").get<int>() == 10);

    fs::path att_out = dir / "att";
    CliResult at = run_cli("attribute --checkpoint " +
                           (ft_out / "model.ckpt").string() +
                           " --smiles Cc1ccccc1 --atoms 0 --out " +
                           att_out.string());
    INFO(at.output);
    REQUIRE(at.code == 0);
    CHECK(at.output.find("effect=") != std::string::npos);

    fs::path att2_out = dir / "att2";
    CliResult at2 = run_cli("attribute --checkpoint " +
                            (ft_out / "model.ckpt").string() + " --input " +
                            (dir / "corpus.csv").string() + " --out " +
                            att2_out.string());
    INFO(at2.output);
    REQUIRE(at2.code == 0);
    std::ifstream att(att2_out / "attributions.csv");
    std::string header;
    REQUIRE(std::getline(att, header));
    CHECK(header == "id,fragment,atoms,attribution");
    int rows = 0;
    std::string line;
    while (std::getline(att, line)) {
      if (!line.empty()) ++rows;
    }
    CHECK(rows >= 4);
  }
}

TEST_CASE("cli split partitions a dataset", "[cli]") {
  fs::path dir = fresh_dir("cliffmask_cli_split");
  write_file(dir / "data.csv", potency_csv());
  fs::path out = dir / "out";

  CliResult res = run_cli("split --input " + (dir / "data.csv").string() +
                          " --out " + out.string() + " --kind scaffold");
  INFO(res.output);
  REQUIRE(res.code == 0);
  std::ifstream sf(out / "split.csv");
  std::string header;
  REQUIRE(std::getline(sf, header));
  CHECK(header == "id,partition");
  int rows = 0;
  std::string line;
  while (std::getline(sf, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 5);
}
