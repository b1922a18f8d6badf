// Copyright 2026 The RolFor Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef ROLFOR_CLI_PATH
#error "ROLFOR_CLI_PATH must name the rolfor executable"
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "rolfor_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs from the work dir so default "." outputs stay out of the caller's cwd.
int run(const std::string& args) {
  const std::string cmd = "cd " + work_dir().string() + " && " + std::string(ROLFOR_CLI_PATH) + " " + args + " >" +
                          (work_dir() / "last.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& text) { return std::count(text.begin(), text.end(), '\n'); }

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Small train/test files and a tiny config shared by the tests below.
struct Fixture {
  fs::path train, test, config;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.train = work_dir() / "train.jsonl";
    x.test = work_dir() / "test.jsonl";
    x.config = work_dir() / "tiny.toml";
    EXPECT_EQ(run("gen --n 24 --seed 11 --out " + x.train.string()), 0);
    EXPECT_EQ(run("gen --n 8 --seed 12 --out " + x.test.string()), 0);
    std::ofstream(x.config) << "# tiny oracle run\nvariant = \"oracle\"\nordering = \"ball_distance_marking\"\n"
                               "gcn_widths = [6, 6]\ndecoder_hidden = 6\nepochs = 2\nbatch_size = 8\nseed = 4\n"
                               "train_path = \""
                            << x.train.string() << "\"\ntest_path = \"" << x.test.string() << "\"\n";
    return x;
  }();
  return f;
}

TEST(CliGen, ByteIdenticalAcrossRuns) {
  const auto a = work_dir() / "gen_a.jsonl", b = work_dir() / "gen_b.jsonl";
  ASSERT_EQ(run("gen --n 50 --seed 7 --out " + a.string()), 0);
  ASSERT_EQ(run("gen --n 50 --seed 7 --out " + b.string()), 0);
  EXPECT_EQ(read(a), read(b));
  EXPECT_EQ(count_lines(read(a)), 50u);
}

TEST(CliGen, DefaultCountAndUsageErrors) {
  const auto out = work_dir() / "gen_default.jsonl";
  ASSERT_EQ(run("gen --seed 1 --out " + out.string()), 0);
  EXPECT_EQ(count_lines(read(out)), 2000u);
  EXPECT_EQ(run("gen --n 0 --out " + (work_dir() / "zero.jsonl").string()), 2);
  EXPECT_EQ(run("gen --n 5"), 2);
  EXPECT_EQ(run("gen --n 5 --defender-gain 2 --out " + (work_dir() / "g.jsonl").string()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(CliTrain, WritesCheckpointMetricsAndManifest) {
  const auto& f = fixture();
  const auto out = work_dir() / "train_a";
  ASSERT_EQ(run("train --config " + f.config.string() + " --out-dir " + out.string()), 0) << read(work_dir() / "last.log");
  EXPECT_TRUE(fs::exists(out / "model.ckpt"));
  EXPECT_EQ(count_lines(read(out / "history.csv")), 3u);
  const std::string metrics = read(out / "metrics.csv");
  EXPECT_EQ(count_lines(metrics), 2u);
  EXPECT_EQ(metrics.rfind("run_id,variant,ordering,ade,fde,topk1,topk3,topk5,topk10,seed\n", 0), 0u);

  const json manifest = json::parse(read(out / "manifest.json"));
  EXPECT_EQ(manifest["status"], "ok");
  EXPECT_EQ(manifest["command"], "train");
  EXPECT_EQ(manifest["config"]["variant"], "oracle");
  EXPECT_TRUE(manifest.contains("run_id"));
  EXPECT_TRUE(manifest.contains("git_describe"));
  EXPECT_EQ(manifest["outputs"].size(), 3u);

  // Same config, same seed: identical metrics and run id.
  const auto again = work_dir() / "train_b";
  ASSERT_EQ(run("train --config " + f.config.string() + " --out-dir " + again.string()), 0);
  EXPECT_EQ(read(out / "metrics.csv"), read(again / "metrics.csv"));
  EXPECT_EQ(read(out / "model.ckpt"), read(again / "model.ckpt"));
  EXPECT_EQ(manifest["run_id"], json::parse(read(again / "manifest.json"))["run_id"]);
}

TEST(CliTrain, FlagsOverrideConfigFile) {
  const auto& f = fixture();
  const auto out = work_dir() / "train_override";
  ASSERT_EQ(run("train --config " + f.config.string() + " --epochs 1 --adjacency 5 --alpha 0.4 --out-dir " +
                out.string()),
            0);
  const json manifest = json::parse(read(out / "manifest.json"));
  EXPECT_EQ(manifest["config"]["epochs"], 1);
  EXPECT_EQ(manifest["config"]["adjacency"], 5);
  EXPECT_EQ(count_lines(read(out / "history.csv")), 2u);
}

TEST(CliTrain, ConfigErrorsExitTwo) {
  const auto& f = fixture();
  const auto out = work_dir() / "train_bad";
  EXPECT_EQ(run("train --variant e2e_finetune --train " + f.train.string() + " --out-dir " + out.string()), 2);
  EXPECT_NE(read(work_dir() / "last.log").find("init"), std::string::npos);
  EXPECT_EQ(run("train --config " + f.config.string() + " --adjacency 12 --out-dir " + out.string()), 2);
  EXPECT_EQ(run("train --config " + (work_dir() / "absent.toml").string() + " --out-dir " + out.string()), 2);
  EXPECT_EQ(run("train --variant oracle --train " + (work_dir() / "absent.jsonl").string() + " --out-dir " +
                out.string()),
            2);
  const auto bad_toml = work_dir() / "bad.toml";
  std::ofstream(bad_toml) << "colour = \"red\"\n";
  EXPECT_EQ(run("train --config " + bad_toml.string() + " --train " + f.train.string() + " --out-dir " + out.string()),
            2);
}

TEST(CliEval, PerturbationRowsAndMissingCheckpoint) {
  const auto& f = fixture();
  const auto train_out = work_dir() / "eval_model";
  ASSERT_EQ(run("train --config " + f.config.string() + " --out-dir " + train_out.string()), 0);
  const auto out = work_dir() / "eval_out";
  ASSERT_EQ(run("eval --checkpoint " + (train_out / "model.ckpt").string() + " --data " + f.test.string() +
                " --perturb light_swap,heavy_swap --out-dir " + out.string()),
            0);
  const std::string metrics = read(out / "metrics.csv");
  EXPECT_EQ(count_lines(metrics), 4u);
  EXPECT_NE(metrics.find("light_swap"), std::string::npos);
  EXPECT_NE(metrics.find("heavy_swap"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));

  EXPECT_EQ(run("eval --checkpoint " + (work_dir() / "nope.ckpt").string() + " --data " + f.test.string() +
                " --out-dir " + out.string()),
            2);
  EXPECT_EQ(run("eval --checkpoint " + (train_out / "model.ckpt").string() + " --data " + f.test.string() +
                " --perturb sideways --out-dir " + out.string()),
            2);
}

TEST(CliGradprobe, CsvSchemaAndSvg) {
  const auto& f = fixture();
  const auto model = work_dir() / "probe_model";
  ASSERT_EQ(run("train --variant e2e --train " + f.train.string() +
                " --gcn-widths 6,6 --decoder-hidden 6 --epochs 1 --out-dir " + model.string()),
            0);
  const auto out = work_dir() / "probe_out";
  ASSERT_EQ(run("gradprobe --checkpoint " + (model / "model.ckpt").string() + " --data " + f.train.string() +
                " --batch 8 --out-dir " + out.string()),
            0);
  const std::string csv = read(out / "gradprobe.csv");
  EXPECT_EQ(csv.rfind("epsilon,ordernn_grad_norm,gcn_grad_norm,pooled_fraction\n", 0), 0u);
  EXPECT_EQ(count_lines(csv), 10u);
  const std::string svg = read(out / "gradprobe.svg");
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(count_of(svg, "<polyline"), 3u);
  EXPECT_EQ(run("gradprobe --checkpoint " + (model / "model.ckpt").string() + " --data " + f.train.string() +
                " --epsilons 1,-2 --out-dir " + out.string()),
            2);
}

TEST(CliAblate, OneRowPerVariantAndSeed) {
  const auto& f = fixture();
  const auto out = work_dir() / "ablate";
  ASSERT_EQ(run("ablate-adjacency --config " + f.config.string() + " --variants 1-3 --seeds 1,2 --epochs 1 --out-dir " +
                out.string()),
            0);
  const std::string csv = read(out / "ablation.csv");
  EXPECT_EQ(count_lines(csv), 7u);
  EXPECT_EQ(count_of(csv, "adjacency_2,"), 2u);
  EXPECT_EQ(run("ablate-adjacency --config " + f.config.string() + " --variants 0-2 --out-dir " + out.string()), 2);
}

TEST(CliPlot, CourtAndThreePolylinesPerPlayer) {
  const auto& f = fixture();
  const auto model = work_dir() / "plot_model";
  ASSERT_EQ(run("train --config " + f.config.string() + " --epochs 1 --out-dir " + model.string()), 0);
  const auto out = work_dir() / "plot";
  ASSERT_EQ(run("plot --data " + f.test.string() + " --index 2 --checkpoint " + (model / "model.ckpt").string() +
                " --out-dir " + out.string()),
            0);
  fs::path svg_path;
  for (const auto& e : fs::directory_iterator(out))
    if (e.path().extension() == ".svg") svg_path = e.path();
  ASSERT_FALSE(svg_path.empty());
  const std::string svg = read(svg_path);
  EXPECT_NE(svg.find("viewBox=\"0 0 28.650 15.240\""), std::string::npos);
  EXPECT_EQ(count_of(svg, "class=\"agent\""), 11u);
  EXPECT_EQ(count_of(svg, "class=\"observed\""), 11u);
  EXPECT_EQ(count_of(svg, "class=\"future\""), 11u);
  EXPECT_EQ(count_of(svg, "class=\"predicted\""), 10u);
  EXPECT_EQ(run("plot --data " + f.test.string() + " --index 99 --out-dir " + out.string()), 2);
}

}  // namespace
