/*
 * Copyright 2026 The pcmf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "pcmf/persist.hpp"

namespace pcmf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int status;
  json doc;
};

// Each test works inside its own scratch directory.
class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pcmf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string at(const std::string& name) const { return (dir_ / name).string(); }

  Outcome run(std::vector<std::string> args) {
    std::ostringstream out;
    const int status = cli::run_command(args, out);
    const std::string text = out.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1) << text;
    return {status, json::parse(text)};
  }

  void write_text(const std::string& name, const std::string& text) {
    write_file(at(name), Bytes(text.begin(), text.end()));
  }

  std::set<std::string> listing() const {
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(dir_)) names.insert(e.path().filename().string());
    return names;
  }

  // gen-world, gen-pairs, compute-prompts and train with a small run.
  void pipeline(const std::string& tag) {
    write_text("run.cfg", "iterations = 40\nn_blocks = 1\nbatch_size = 8\nprompt_samples = 500\n");
    ASSERT_EQ(run({"gen-world", "--config", at("run.cfg"), "--out", at("w.json")}).status, 0);
    ASSERT_EQ(run({"gen-pairs", "--config", at("run.cfg"), "--world", at("w.json"), "--n", "400",
                   "--out", at("p.pcmd")})
                  .status,
              0);
    ASSERT_EQ(run({"compute-prompts", "--config", at("run.cfg"), "--world", at("w.json"), "--out",
                   at("pr.json")})
                  .status,
              0);
    const Outcome t = run({"train", "--config", at("run.cfg"), "--world", at("w.json"), "--pairs",
                           at("p.pcmd"), "--ckpt", at("c" + tag + ".pcmf"), "--out",
                           at("m" + tag + ".json")});
    ASSERT_EQ(t.status, 0) << t.doc;
    trained_ = t.doc;
  }

  fs::path dir_;
  json trained_;
};

TEST_F(Cli, GenPairsWithZeroRecords) {
  const Outcome o = run({"gen-pairs", "--n", "0", "--out", at("e.pcmd")});
  EXPECT_EQ(o.status, cli::kExitOk);
  EXPECT_TRUE(o.doc["ok"].get<bool>());
  EXPECT_EQ(load_pairs(at("e.pcmd")).size(), 0u);
}

TEST_F(Cli, UsageErrors) {
  const Outcome no_ckpt = run({"translate", "--prompts", at("pr.json")});
  EXPECT_EQ(no_ckpt.status, cli::kExitUsage);
  EXPECT_EQ(no_ckpt.doc["error"]["code"], "UsageError");
  EXPECT_FALSE(no_ckpt.doc["ok"].get<bool>());

  EXPECT_EQ(run({"gen-world", "--frobnicate", "1"}).status, cli::kExitUsage);
  EXPECT_EQ(run({}).status, cli::kExitUsage);
  EXPECT_EQ(run({"not-a-command"}).status, cli::kExitUsage);
  EXPECT_EQ(run({"gen-pairs", "--n", "many", "--out", at("x")}).status, cli::kExitUsage);
  EXPECT_EQ(run({"gen-world"}).status, cli::kExitUsage);  // no output path anywhere
  EXPECT_EQ(run({"train"}).doc["error"]["code"], "UsageError");
  EXPECT_EQ(run({"manipulate"}).status, cli::kExitUsage);
  // A flag that exists elsewhere is still unknown to this subcommand.
  EXPECT_EQ(run({"gen-world", "--ckpt", at("c"), "--out", at("w")}).status, cli::kExitUsage);
  EXPECT_TRUE(listing().empty());
}

TEST_F(Cli, LibraryErrorsBecomeErrorObjects) {
  write_text("bad.cfg", "colour = red\n");
  const Outcome unknown = run({"gen-world", "--config", at("bad.cfg"), "--out", at("w.json")});
  EXPECT_EQ(unknown.status, cli::kExitFailure);
  EXPECT_EQ(unknown.doc["error"]["code"], "UnknownKey");
  EXPECT_NE(unknown.doc["error"]["message"].get<std::string>().find("line 1"), std::string::npos);

  const Outcome missing = run({"eval", "--pairs", at("none.pcmd"), "--ckpt", at("none.pcmf")});
  EXPECT_EQ(missing.doc["error"]["code"], "IoError");
  EXPECT_EQ(missing.status, cli::kExitFailure);
  EXPECT_EQ(listing(), std::set<std::string>{"bad.cfg"});
}

TEST_F(Cli, ScriptedSequenceAgreesWithEval) {
  pipeline("a");
  EXPECT_EQ(trained_["iterations"], 40);
  EXPECT_EQ(trained_["fc_layers"], 14);
  const Outcome e = run({"eval", "--config", at("run.cfg"), "--world", at("w.json"), "--pairs",
                         at("p.pcmd"), "--ckpt", at("ca.pcmf")});
  ASSERT_EQ(e.status, 0) << e.doc;
  EXPECT_EQ(e.doc["holdout"], trained_["holdout"]);
  // The checkpoint stores f32, so the reloaded network differs by rounding only.
  for (const char* key :
       {"mean_cie_cosine_distance", "mean_abs_mean_of_se_pred", "mean_abs_std_minus_one"}) {
    EXPECT_NEAR(e.doc[key].get<double>(), trained_[key].get<double>(), 1e-5) << key;
    EXPECT_GT(trained_[key].get<double>(), 0.0) << key;
  }
  const json report = json::parse(read_file(at("ma.json")));
  EXPECT_EQ(report["history"].size(), 40u);
  EXPECT_EQ(report["history_columns"].size(), 5u);
  EXPECT_EQ(listing(), (std::set<std::string>{"run.cfg", "w.json", "p.pcmd", "pr.json", "ca.pcmf",
                                              "ma.json"}));
}

TEST_F(Cli, RepeatedRunsAreBitwiseIdentical) {
  pipeline("a");
  pipeline("b");
  EXPECT_EQ(read_file(at("ca.pcmf")), read_file(at("cb.pcmf")));
  EXPECT_EQ(read_file(at("ma.json")), read_file(at("mb.json")));
}

TEST_F(Cli, ReportVerifiesAndDetectsTampering) {
  pipeline("a");
  const Outcome ok = run({"report", "--world", at("w.json"), "--pairs", at("p.pcmd"), "--ckpt",
                          at("ca.pcmf"), "--prompts", at("pr.json")});
  ASSERT_EQ(ok.status, 0) << ok.doc;
  EXPECT_TRUE(ok.doc["pairs"]["verified"].get<bool>());
  EXPECT_EQ(ok.doc["checkpoint"]["arch"], "c2s");
  EXPECT_TRUE(ok.doc["checkpoint"]["has_adam_state"].get<bool>());
  EXPECT_EQ(ok.doc["prompts"]["image_set_size"], 500);

  Bytes pairs = read_file(at("p.pcmd"));
  pairs.back() ^= 0x01;
  write_file(at("p.pcmd"), pairs);
  const Outcome bad = run({"report", "--world", at("w.json"), "--pairs", at("p.pcmd")});
  EXPECT_EQ(bad.status, cli::kExitFailure);
  EXPECT_EQ(bad.doc["error"]["code"], "FingerprintMismatch");

  Bytes ckpt = read_file(at("ca.pcmf"));
  ckpt[1] = 'X';
  write_file(at("ca.pcmf"), ckpt);
  EXPECT_EQ(run({"report", "--ckpt", at("ca.pcmf")}).doc["error"]["code"], "BadMagic");
}

TEST_F(Cli, TrainingAgainstAnotherWorldIsRejected) {
  pipeline("a");
  ASSERT_EQ(run({"gen-world", "--seed", "99", "--out", at("other.json")}).status, 0);
  const Outcome o = run({"train", "--config", at("run.cfg"), "--world", at("other.json"),
                         "--pairs", at("p.pcmd"), "--ckpt", at("x.pcmf")});
  EXPECT_EQ(o.doc["error"]["code"], "FingerprintMismatch");
  EXPECT_FALSE(fs::exists(at("x.pcmf")));
}

TEST_F(Cli, TranslateAndManipulate) {
  pipeline("a");
  const std::vector<std::string> base = {"translate", "--world", at("w.json"), "--prompts",
                                         at("pr.json"), "--ckpt", at("ca.pcmf")};
  const Outcome t = run(base);
  ASSERT_EQ(t.status, 0) << t.doc;
  EXPECT_EQ(t.doc["alpha"], 1.75);
  EXPECT_EQ(t.doc["se"].size(), 16u);
  std::vector<std::string> far = base;
  far.insert(far.end(), {"--alpha", "3"});
  EXPECT_EQ(run(far).doc["error"]["code"], "RangeError");
  std::vector<std::string> short_attrs = base;
  short_attrs.insert(short_attrs.end(), {"--attrs", "1,2,3"});
  EXPECT_EQ(run(short_attrs).doc["error"]["code"], "DimensionMismatch");

  const std::string target = "1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0";
  const Outcome still =
      run({"manipulate", "--world", at("w.json"), "--attrs", target, "--alpha", "0"});
  ASSERT_EQ(still.status, 0) << still.doc;
  EXPECT_EQ(still.doc["displacement"], 0.0);
  EXPECT_FALSE(still.doc["within_suggested_range"].get<bool>());
  const Outcome moved = run({"manipulate", "--world", at("w.json"), "--attrs", target, "--alpha",
                             "0.5", "--ckpt", at("ca.pcmf"), "--out", at("edit.json")});
  ASSERT_EQ(moved.status, 0) << moved.doc;
  EXPECT_GT(moved.doc["displacement"].get<double>(), 0.0);
  EXPECT_LT(moved.doc["cosine_to_origin"].get<double>(), 1.0);
  EXPECT_TRUE(moved.doc.contains("se"));
  EXPECT_TRUE(fs::exists(at("edit.json")));
}

TEST_F(Cli, HelpExitsCleanly) {
  std::ostringstream out;
  EXPECT_EQ(cli::run_command({"--help"}, out), cli::kExitOk);
  EXPECT_NE(out.str().find("compute-prompts"), std::string::npos);
}

}  // namespace
}  // namespace pcmf
