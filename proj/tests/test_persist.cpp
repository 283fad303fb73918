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
#include <random>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "pcmf/config.hpp"
#include "pcmf/persist.hpp"
#include "test_util.hpp"

namespace pcmf {
namespace {

using testing::error_code;

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("pcmf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

// ---------------------------------------------------------------------------
// Config

TEST(Config, EmptyTextGivesDefaults) {
  const RunConfig c = parse_config("");
  EXPECT_DOUBLE_EQ(c.projection.alpha_translate, 1.75);
  EXPECT_EQ(c.train.batch_size, 16);
  EXPECT_DOUBLE_EQ(c.train.weights.sem_cons, 1.0);
  EXPECT_DOUBLE_EQ(c.train.weights.l1, 0.3);
  EXPECT_DOUBLE_EQ(c.train.weights.reg, 0.3);
  EXPECT_EQ(c.train.iterations, 5000u);
  EXPECT_EQ(c.n_pairs, 20000u);
  EXPECT_EQ(c.c2s.d, 16);
  EXPECT_EQ(c.world.d_emb, 16);
  EXPECT_EQ(c.world.d_z, 16);
  EXPECT_EQ(c.arch, Architecture::C2S);
}

TEST(Config, ParsesValuesCommentsAndBlankLines) {
  const RunConfig c = parse_config(
      "# a run\n"
      "\n"
      "batch_size = 32   # trailing comment\n"
      "  alpha=1.2\n"
      "arch = mlp\r\n"
      "renormalize_output = false\n"
      "gap_scale = 0\n"
      "world = /tmp/w.json\n");
  EXPECT_EQ(c.train.batch_size, 32);
  EXPECT_DOUBLE_EQ(c.projection.alpha_translate, 1.2);
  EXPECT_EQ(c.arch, Architecture::PlainMlp);
  EXPECT_FALSE(c.projection.renormalize_output);
  EXPECT_EQ(c.world.gap_scale, 0.0);
  EXPECT_EQ(c.world_path, "/tmp/w.json");
}

TEST(Config, Errors) {
  EXPECT_EQ(error_code([] { parse_config("alpha = 3.0"); }), Errc::RangeError);
  EXPECT_EQ(error_code([] { parse_config("alpha = 0.5"); }), Errc::RangeError);
  EXPECT_EQ(error_code([] { parse_config("batch_size = 1"); }), Errc::RangeError);
  EXPECT_EQ(error_code([] { parse_config("colour = red"); }), Errc::UnknownKey);
  EXPECT_EQ(error_code([] { parse_config("batch_size = sixteen"); }), Errc::TypeError);
  EXPECT_EQ(error_code([] { parse_config("iterations = -5"); }), Errc::TypeError);
  EXPECT_EQ(error_code([] { parse_config("lr_max = nan"); }), Errc::TypeError);
  EXPECT_EQ(error_code([] { parse_config("arch = resnet"); }), Errc::TypeError);
  EXPECT_EQ(error_code([] { parse_config("just words"); }), Errc::TypeError);
  EXPECT_EQ(error_code([] { load_config("/nonexistent/dir/run.cfg"); }), Errc::IoError);
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    parse_config("batch_size = 16\n\n# note\nlr_max = fast\n");
    FAIL() << "expected TypeError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TypeError);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
  try {
    parse_config("\nwhat = 1\n");
    FAIL() << "expected UnknownKey";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Config, RenderParseRoundTrip) {
  const std::string once = render_config(parse_config("batch_size = 16\n"));
  EXPECT_NE(once.find("batch_size = 16\n"), std::string::npos);
  EXPECT_EQ(render_config(parse_config(once)), once);
  const std::string custom = render_config(parse_config(
      "lr_max = 0.000123\nalpha = 1.9\narch = mlp\nworld_seed = 18446744073709551615\n"));
  EXPECT_EQ(render_config(parse_config(custom)), custom);
  EXPECT_NE(custom.find("world_seed = 18446744073709551615"), std::string::npos);
  // Every key appears exactly once in the canonical form.
  for (const std::string& key : config_keys()) {
    EXPECT_NE(once.find(key + " = "), std::string::npos) << key;
  }
}

// ---------------------------------------------------------------------------
// Checkpoints

C2SNetwork trained_tiny(Architecture arch) {
  SeededRng rng(3);
  C2SNetwork net = arch == Architecture::C2S ? build_c2s({8, 2, 0.1}, rng) : build_plain_mlp(8, 5, rng);
  // Non-trivial running statistics and slopes.
  std::mt19937_64 gen(4);
  for (std::size_t i = 0; i < net.net.params().size(); ++i) {
    auto& p = net.net.params()[i];
    p.value += oracle::random_matrix(gen, p.value.rows(), p.value.cols(), 0.05);
    if (p.name.ends_with("running_var")) p.value = p.value.cwiseAbs();
  }
  return net;
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  for (Architecture arch : {Architecture::C2S, Architecture::PlainMlp}) {
    const C2SNetwork net = trained_tiny(arch);
    const Bytes first = encode_checkpoint(net);
    const LoadedCheckpoint loaded = decode_checkpoint(first);
    EXPECT_FALSE(loaded.adam.has_value());
    EXPECT_EQ(loaded.net.arch, arch);
    EXPECT_EQ(loaded.net.depth, net.depth);
    EXPECT_EQ(loaded.net.config.dropout_rate, net.config.dropout_rate);
    EXPECT_EQ(encode_checkpoint(loaded.net), first);
  }
}

TEST(Checkpoint, LoadedNetworkMatchesWithinFloatQuantization) {
  const C2SNetwork net = trained_tiny(Architecture::C2S);
  const LoadedCheckpoint loaded = decode_checkpoint(encode_checkpoint(net));
  // Reference: the original network with every parameter rounded to f32.
  C2SNetwork rounded = net;
  for (std::size_t i = 0; i < rounded.net.params().size(); ++i) {
    auto& v = rounded.net.params()[i].value;
    v = v.cast<float>().cast<double>();
    EXPECT_EQ(v, loaded.net.net.params()[i].value) << rounded.net.params()[i].name;
  }
  std::mt19937_64 gen(5);
  const Matrix x = oracle::random_matrix(gen, 7, 8);
  EXPECT_EQ(c2s_forward(loaded.net, x), c2s_forward(rounded, x));
  EXPECT_LT((c2s_forward(loaded.net, x) - c2s_forward(net, x)).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Checkpoint, AdamStateRoundTrips) {
  const C2SNetwork net = trained_tiny(Architecture::C2S);
  nn::AdamState adam = nn::AdamState::zeros_like(net.net.params());
  adam.t = 42;
  std::mt19937_64 gen(6);
  for (auto& m : adam.m) m = oracle::random_matrix(gen, m.rows(), m.cols());
  for (auto& v : adam.v) v = oracle::random_matrix(gen, v.rows(), v.cols()).cwiseAbs();
  const Bytes bytes = encode_checkpoint(net, &adam);
  const LoadedCheckpoint loaded = decode_checkpoint(bytes);
  ASSERT_TRUE(loaded.adam.has_value());
  EXPECT_EQ(loaded.adam->t, 42u);
  EXPECT_EQ(encode_checkpoint(loaded.net, &*loaded.adam), bytes);
}

TEST(Checkpoint, ByteLayoutHeader) {
  SeededRng rng(1);
  const C2SNetwork net = build_c2s({8, 1, 0.1}, rng);
  const Bytes b = encode_checkpoint(net);
  ASSERT_GE(b.size(), 32u);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "PCMF");
  const auto u32 = [&](std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) |
           (static_cast<std::uint32_t>(b[at + 3]) << 24);
  };
  EXPECT_EQ(u32(4), kCheckpointVersion);
  EXPECT_EQ(u32(8), 0u);   // arch
  EXPECT_EQ(u32(12), 8u);  // d
  EXPECT_EQ(u32(16), 1u);  // blocks
  // dropout f64 at 20..27, then the tensor count.
  EXPECT_EQ(u32(28), net.net.params().size());
  // First tensor: "layer0.weight", rank 2, 8 x 8.
  EXPECT_EQ(u32(32), 13u);
  EXPECT_EQ(std::string(b.begin() + 36, b.begin() + 49), "layer0.weight");
  EXPECT_EQ(u32(49), 2u);
  EXPECT_EQ(u32(53), 8u);
  EXPECT_EQ(u32(57), 8u);
  const float w0 = std::bit_cast<float>(u32(61));
  EXPECT_EQ(static_cast<double>(w0),
            static_cast<double>(static_cast<float>(net.net.params()[0].value(0, 0))));
}

TEST(Checkpoint, CorruptionIsRejected) {
  const C2SNetwork net = trained_tiny(Architecture::C2S);
  const Bytes good = encode_checkpoint(net);

  Bytes magic = good;
  magic[0] = 'X';
  EXPECT_EQ(error_code([&] { decode_checkpoint(magic); }), Errc::BadMagic);

  Bytes version = good;
  version[4] = 9;
  EXPECT_EQ(error_code([&] { decode_checkpoint(version); }), Errc::VersionMismatch);

  Bytes count = good;
  count[28] += 1;
  EXPECT_EQ(error_code([&] { decode_checkpoint(count); }), Errc::ShapeMismatch);

  Bytes blocks = good;
  blocks[16] = 3;  // config names three blocks; the tensors describe two
  EXPECT_EQ(error_code([&] { decode_checkpoint(blocks); }), Errc::ShapeMismatch);

  Bytes width = good;
  width[12] = 9;
  EXPECT_EQ(error_code([&] { decode_checkpoint(width); }), Errc::ShapeMismatch);

  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, good.size() / 2,
                          good.size() - 1}) {
    const Bytes truncated(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_EQ(error_code([&] { decode_checkpoint(truncated); }), Errc::TruncatedFile) << cut;
  }
}

TEST(Checkpoint, FileRoundTrip) {
  TempDir dir;
  const C2SNetwork net = trained_tiny(Architecture::PlainMlp);
  save_checkpoint(net, dir.file("a.pcmf"));
  const LoadedCheckpoint loaded = load_checkpoint(dir.file("a.pcmf"));
  save_checkpoint(loaded.net, dir.file("b.pcmf"));
  EXPECT_EQ(read_file(dir.file("a.pcmf")), read_file(dir.file("b.pcmf")));
  EXPECT_EQ(error_code([&] { load_checkpoint(dir.file("missing.pcmf")); }), Errc::IoError);
}

// ---------------------------------------------------------------------------
// Pair datasets

TEST(Pairs, EmptyDatasetRoundTrips) {
  const ToyWorld w(ToyWorldConfig{});
  const PairDataset empty = generate_pairs(w, 0, 5);
  const Bytes b = encode_pairs(empty);
  EXPECT_EQ(b.size(), 4u + 4u + 4u + 4u + 8u + 8u + 8u);
  const PairDataset back = decode_pairs(b);
  EXPECT_EQ(back.size(), 0u);
  EXPECT_EQ(back.world_fingerprint, w.fingerprint());
  EXPECT_EQ(back.seed, 5u);
  EXPECT_EQ(encode_pairs(back), b);
}

TEST(Pairs, DeterministicAndByteExact) {
  const ToyWorld w(ToyWorldConfig{});
  const Bytes a = encode_pairs(generate_pairs(w, 100, 8));
  const Bytes b = encode_pairs(generate_pairs(w, 100, 8));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 40u + 100u * 32u * 4u);
  const PairDataset back = decode_pairs(a);
  EXPECT_EQ(encode_pairs(back), a);
  EXPECT_EQ(back.d_z, 16);
  EXPECT_EQ(back.d_emb, 16);
  EXPECT_EQ(back.size(), 100u);
}

TEST(Pairs, CorruptionAndWrongWorld) {
  const ToyWorld w(ToyWorldConfig{});
  const Bytes good = encode_pairs(generate_pairs(w, 10, 8));
  Bytes magic = good;
  magic[3] = 'F';
  EXPECT_EQ(error_code([&] { decode_pairs(magic); }), Errc::BadMagic);
  const Bytes cut(good.begin(), good.end() - 1);
  EXPECT_EQ(error_code([&] { decode_pairs(cut); }), Errc::TruncatedFile);
  Bytes huge = good;
  for (int i = 16; i < 24; ++i) huge[static_cast<std::size_t>(i)] = 0xFF;  // n = 2^64 - 1
  EXPECT_EQ(error_code([&] { decode_pairs(huge); }), Errc::TruncatedFile);
  ToyWorldConfig other;
  other.seed = 3;
  EXPECT_EQ(error_code([&] { require_matching_world(decode_pairs(good), ToyWorld(other)); }),
            Errc::FingerprintMismatch);
}

TEST(Pairs, FileRoundTrip) {
  TempDir dir;
  const ToyWorld w(ToyWorldConfig{});
  save_pairs(generate_pairs(w, 20, 1), dir.file("p.pcmd"));
  const PairDataset loaded = load_pairs(dir.file("p.pcmd"));
  save_pairs(loaded, dir.file("q.pcmd"));
  EXPECT_EQ(read_file(dir.file("p.pcmd")), read_file(dir.file("q.pcmd")));
}

// ---------------------------------------------------------------------------
// JSON documents

TEST(WorldFile, RegeneratesAndVerifies) {
  TempDir dir;
  ToyWorldConfig cfg;
  cfg.seed = 31;
  cfg.gap_scale = 0.25;
  const ToyWorld w(cfg);
  save_world(w, dir.file("w.json"));
  const ToyWorld back = load_world(dir.file("w.json"));
  EXPECT_EQ(back.fingerprint(), w.fingerprint());
  EXPECT_EQ(back.config().gap_scale, 0.25);

  nlohmann::json doc = world_to_json(w);
  EXPECT_EQ(doc["fingerprint"].get<std::string>(), hex64(w.fingerprint()));
  doc["config"]["seed"] = 32;
  EXPECT_EQ(error_code([&] { world_from_json(doc); }), Errc::FingerprintMismatch);
  doc = world_to_json(w);
  doc["format"] = "something-else";
  EXPECT_EQ(error_code([&] { world_from_json(doc); }), Errc::BadMagic);
  doc = world_to_json(w);
  doc["config"].erase("d_z");
  EXPECT_EQ(error_code([&] { world_from_json(doc); }), Errc::TypeError);
}

TEST(PromptsFile, RoundTripIsExact) {
  TempDir dir;
  const ToyWorld w(ToyWorldConfig{});
  const PairDataset data = generate_pairs(w, 300, 2);
  const PromptPair p(text_prompt_from_attributes(w, neutral_attributes(w)),
                     compute_set_prompt(data.cie, Modality::Image), {"neutral", 300});
  save_prompts(p, w.fingerprint(), dir.file("p.json"));
  const PromptPair back = load_prompts(dir.file("p.json"));
  EXPECT_EQ(back.cte_prompt.values(), p.cte_prompt.values());
  EXPECT_EQ(back.cie_prompt.values(), p.cie_prompt.values());
  EXPECT_EQ(back.provenance.text_source, "neutral");
  EXPECT_EQ(back.provenance.image_set_size, 300u);
  save_prompts(back, w.fingerprint(), dir.file("q.json"));
  EXPECT_EQ(read_file(dir.file("p.json")), read_file(dir.file("q.json")));
  nlohmann::json doc = prompts_to_json(p, w.fingerprint());
  doc["cie_prompt"][0] = 100.0;  // breaks the length invariant
  EXPECT_EQ(error_code([&] { prompts_from_json(doc); }), Errc::InvalidArgument);
}

TEST(Metrics, JsonShape) {
  Metrics m;
  m.mean_cie_cosine_distance = 0.25;
  m.history.push_back({1.0, 0.5, 1.0, 0.2, 1e-4});
  m.history.push_back({0.9, 0.4, 1.0, 0.2, 1e-7});
  const nlohmann::json j = metrics_to_json(m, true);
  EXPECT_EQ(j["mean_cie_cosine_distance"].get<double>(), 0.25);
  EXPECT_EQ(j["iterations"].get<int>(), 2);
  EXPECT_EQ(j["final_loss"]["lr"].get<double>(), 1e-7);
  EXPECT_EQ(j["history"].size(), 2u);
  EXPECT_FALSE(metrics_to_json(m, false).contains("history"));
}

TEST(Hex, Fixed16Digits) {
  EXPECT_EQ(hex64(0), "0000000000000000");
  EXPECT_EQ(hex64(0xDEADBEEFull), "00000000deadbeef");
}

}  // namespace
}  // namespace pcmf
