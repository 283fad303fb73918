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

#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <string_view>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pcmf/c2s.hpp"
#include "pcmf/config.hpp"
#include "pcmf/error.hpp"
#include "pcmf/persist.hpp"
#include "pcmf/prompt.hpp"
#include "pcmf/toy_world.hpp"
#include "pcmf/training.hpp"

namespace pcmf::cli {
namespace {

using json = nlohmann::json;

// Raw flag values. Paths left empty fall back to the config file.
struct Flags {
  std::string config;
  std::string world;
  std::string pairs;
  std::string ckpt;
  std::string prompts;
  std::string out;
  std::string attrs;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double alpha = 0.0;

  // The subcommand that was parsed; numeric overrides apply only when given.
  const CLI::App* sub = nullptr;
  bool given(const char* name) const { return sub->count(name) > 0; }
};

enum FlagSet : unsigned {
  kWorld = 1u << 0,
  kPairs = 1u << 1,
  kCkpt = 1u << 2,
  kPrompts = 1u << 3,
  kOut = 1u << 4,
  kSeed = 1u << 5,
  kN = 1u << 6,
  kAlpha = 1u << 7,
  kAttrs = 1u << 8,
};

void add_flags(CLI::App* sub, Flags& f, unsigned which) {
  sub->add_option("--config", f.config, "key = value run configuration file");
  if (which & kWorld) sub->add_option("--world", f.world, "world JSON (default: regenerate from config)");
  if (which & kPairs) sub->add_option("--pairs", f.pairs, "PCMD pair dataset");
  if (which & kCkpt) sub->add_option("--ckpt", f.ckpt, "PCMF checkpoint");
  if (which & kPrompts) sub->add_option("--prompts", f.prompts, "prompt pair JSON");
  if (which & kOut) sub->add_option("--out", f.out, "output path");
  if (which & kSeed) sub->add_option("--seed", f.seed, "seed override");
  if (which & kN) sub->add_option("--n", f.n, "number of records");
  if (which & kAlpha) sub->add_option("--alpha", f.alpha, "projection scale");
  if (which & kAttrs) {
    sub->add_option("--attrs", f.attrs,
                    "attribute vector as comma-separated reals, or 'neutral'");
  }
}

[[noreturn]] void usage(const std::string& message) { throw Error(Errc::UsageError, message); }

std::string pick(const std::string& flag, const std::string& from_config) {
  return flag.empty() ? from_config : flag;
}

std::string require_path(const std::string& flag, const std::string& from_config,
                         const char* name) {
  std::string path = pick(flag, from_config);
  if (path.empty()) usage(std::string("--") + name + " is required");
  return path;
}

RunConfig resolve_config(const Flags& f) {
  return f.config.empty() ? RunConfig{} : load_config(f.config);
}

ToyWorld resolve_world(const Flags& f, const RunConfig& c) {
  const std::string path = pick(f.world, c.world_path);
  return path.empty() ? ToyWorld(c.world) : load_world(path);
}

Vector parse_attrs(const std::string& text, const ToyWorld& world) {
  if (text.empty() || text == "neutral") return neutral_attributes(world);
  std::vector<double> values;
  std::string_view rest = text;
  while (true) {
    const std::size_t comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty() ||
        !std::isfinite(v)) {
      throw Error(Errc::TypeError, "--attrs: '" + std::string(item) + "' is not a finite real");
    }
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (static_cast<int>(values.size()) != world.config().d_sem) {
    throw Error(Errc::DimensionMismatch, "--attrs has " + std::to_string(values.size()) +
                                             " values; the world expects " +
                                             std::to_string(world.config().d_sem));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json to_json(const Eigen::Ref<const Vector>& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

void write_json(const std::string& path, const json& doc) {
  const std::string text = doc.dump(2) + "\n";
  write_file(path, Bytes(text.begin(), text.end()));
}

C2SNetwork fresh_network(const RunConfig& c) {
  SeededRng init(c.train.init_seed);
  if (c.arch == Architecture::C2S) return build_c2s(c.c2s, init);
  return build_plain_mlp(c.c2s.d, c.mlp_layers, init);
}

std::size_t stored_values(const C2SNetwork& net) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < net.net.params().size(); ++i) {
    total += static_cast<std::size_t>(net.net.params()[i].value.size());
  }
  return total;
}

const char* arch_name(Architecture a) { return a == Architecture::C2S ? "c2s" : "mlp"; }

// --- subcommands -----------------------------------------------------------

json cmd_gen_world(const Flags& f) {
  RunConfig c = resolve_config(f);
  if (f.given("--seed")) c.world.seed = f.seed;
  const ToyWorld world(c.world);
  const std::string out = require_path(f.out, c.world_path, "out");
  save_world(world, out);
  return {{"fingerprint", hex64(world.fingerprint())},
          {"config", world_to_json(world)["config"]},
          {"out", out}};
}

json cmd_gen_pairs(const Flags& f) {
  const RunConfig c = resolve_config(f);
  const ToyWorld world = resolve_world(f, c);
  const std::size_t n = f.given("--n") ? f.n : c.n_pairs;
  const std::uint64_t seed = f.given("--seed") ? f.seed : c.pair_seed;
  const std::string out = require_path(f.out, c.pairs_path, "out");
  const PairDataset data = generate_pairs(world, n, seed);
  save_pairs(data, out);
  return {{"n", n}, {"seed", seed}, {"world_fingerprint", hex64(world.fingerprint())}, {"out", out}};
}

json cmd_compute_prompts(const Flags& f) {
  const RunConfig c = resolve_config(f);
  const ToyWorld world = resolve_world(f, c);
  const std::string out = require_path(f.out, c.prompts_path, "out");

  // Image prompt: the pair file if one is named, otherwise fresh samples.
  PairDataset images;
  const std::string pairs_path = pick(f.pairs, c.pairs_path);
  if (!pairs_path.empty()) {
    images = load_pairs(pairs_path);
    require_matching_world(images, world);
  } else {
    images = generate_pairs(world, c.prompt_samples, f.given("--seed") ? f.seed : c.pair_seed);
  }
  const Embedding cie_prompt = compute_set_prompt(images.cie, Modality::Image);

  std::string source;
  Embedding cte_prompt = cie_prompt;
  if (f.attrs == "set-average") {
    // Text embeddings of the very images that formed the image prompt.
    const Matrix texts = world.encode_text(world.attributes(world.generate(images.se)));
    cte_prompt = compute_set_prompt(texts, Modality::Text);
    source = "set-average";
  } else {
    cte_prompt = text_prompt_from_attributes(world, parse_attrs(f.attrs, world));
    source = f.attrs.empty() ? "neutral" : f.attrs;
  }
  const PromptPair prompts(cte_prompt, cie_prompt, {source, images.size()});
  save_prompts(prompts, world.fingerprint(), out);
  return {{"text_source", source},
          {"image_set_size", images.size()},
          {"prompt_cosine", cosine_similarity(cte_prompt, cie_prompt)},
          {"world_fingerprint", hex64(world.fingerprint())},
          {"out", out}};
}

json cmd_train(const Flags& f) {
  RunConfig c = resolve_config(f);
  if (f.given("--seed")) c.train.init_seed = f.seed;
  const ToyWorld world = resolve_world(f, c);
  const PairDataset data = load_pairs(require_path(f.pairs, c.pairs_path, "pairs"));
  const std::string ckpt = require_path(f.ckpt, c.ckpt_path, "ckpt");

  C2SNetwork net = fresh_network(c);
  const TrainResult result = train(net, data, world, c.train);
  save_checkpoint(net, ckpt, &result.adam);

  json summary = metrics_to_json(result.metrics, false);
  summary["arch"] = arch_name(net.arch);
  summary["fc_layers"] = count_fc_layers(net);
  summary["holdout"] = result.split.holdout.size();
  summary["ckpt"] = ckpt;
  const std::string out = pick(f.out, c.out_path);
  if (!out.empty()) {
    json report = metrics_to_json(result.metrics, true);
    report["config"] = render_config(c);
    report["world_fingerprint"] = hex64(world.fingerprint());
    write_json(out, report);
    summary["out"] = out;
  }
  return summary;
}

json cmd_eval(const Flags& f) {
  const RunConfig c = resolve_config(f);
  const ToyWorld world = resolve_world(f, c);
  const PairDataset data = load_pairs(require_path(f.pairs, c.pairs_path, "pairs"));
  const LoadedCheckpoint loaded = load_checkpoint(require_path(f.ckpt, c.ckpt_path, "ckpt"));
  const Split split = split_holdout(data.size(), c.train.holdout_fraction, c.train.data_seed);
  const Metrics m = evaluate(loaded.net, world, data, split.holdout);
  json summary = metrics_to_json(m, false);
  summary["holdout"] = split.holdout.size();
  summary["arch"] = arch_name(loaded.net.arch);
  const std::string out = pick(f.out, c.out_path);
  if (!out.empty()) {
    write_json(out, summary);
    summary["out"] = out;
  }
  return summary;
}

json cmd_translate(const Flags& f) {
  RunConfig c = resolve_config(f);
  // Only the flag counts here: a translation always names its network.
  if (f.ckpt.empty()) usage("translate requires --ckpt");
  if (f.given("--alpha")) c.projection.alpha_translate = f.alpha;
  c.projection.validate();
  const ToyWorld world = resolve_world(f, c);
  const PromptPair prompts = load_prompts(require_path(f.prompts, c.prompts_path, "prompts"));
  const LoadedCheckpoint loaded = load_checkpoint(f.ckpt);
  const Translation t = translate(world, prompts, loaded.net, parse_attrs(f.attrs, world),
                                  c.projection);
  json summary = {{"alpha", c.projection.alpha_translate},
                  {"similarity", t.similarity},
                  {"se", to_json(t.se)},
                  {"cie_input", to_json(t.cie_input)},
                  {"cie_rebuilt", to_json(t.cie_rebuilt.values())}};
  const std::string out = pick(f.out, c.out_path);
  if (!out.empty()) {
    write_json(out, summary);
    summary["out"] = out;
  }
  return summary;
}

json cmd_manipulate(const Flags& f) {
  RunConfig c = resolve_config(f);
  if (f.given("--alpha")) c.alpha_manipulate = f.alpha;
  c.validate();
  if (f.attrs.empty()) usage("manipulate requires --attrs (the target description)");
  const ToyWorld world = resolve_world(f, c);

  // The origin is one sampled image together with the text of its own attributes.
  const PairDataset origin = generate_pairs(world, 1, f.given("--seed") ? f.seed : c.pair_seed);
  const Vector z = origin.se.row(0).transpose();
  const Embedding cie_origin(origin.cie.row(0).transpose(), Modality::Image);
  const Embedding cte_origin = world.encode_text(world.attributes_of(z));
  const Embedding cte_target = world.encode_text(parse_attrs(f.attrs, world));

  const double alpha = c.alpha_manipulate;
  const Vector raw = manipulate_raw(cie_origin, cte_origin, cte_target, alpha);
  const Vector edited = finish_projection(raw, c.projection);
  json summary = {
      {"alpha", alpha},
      {"within_suggested_range", alpha >= c.projection.alpha_manipulate_min &&
                                     alpha <= c.projection.alpha_manipulate_max},
      {"displacement", (raw - cie_origin.values()).norm()},
      {"cosine_to_origin", cosine_similarity(edited, cie_origin.values())},
      {"cosine_to_target", cosine_similarity(edited, cte_target.values())},
      {"cie_edited", to_json(edited)}};
  if (!f.ckpt.empty()) {
    const LoadedCheckpoint loaded = load_checkpoint(f.ckpt);
    const Matrix se = c2s_forward(loaded.net, edited.transpose());
    const Vector rebuilt = world.rebuild(se).row(0).transpose();
    summary["se"] = to_json(se.row(0).transpose());
    summary["similarity"] = cosine_similarity(rebuilt, edited);
  }
  const std::string out = pick(f.out, c.out_path);
  if (!out.empty()) {
    write_json(out, summary);
    summary["out"] = out;
  }
  return summary;
}

json cmd_report(const Flags& f) {
  const RunConfig c = resolve_config(f);
  const ToyWorld world = resolve_world(f, c);
  json summary = {{"world", world_to_json(world)}};

  const std::string pairs_path = pick(f.pairs, c.pairs_path);
  if (!pairs_path.empty()) {
    const Bytes stored = read_file(pairs_path);
    const PairDataset data = decode_pairs(stored);
    require_matching_world(data, world);
    // A dataset is verified by regenerating it from its embedded seed.
    if (encode_pairs(generate_pairs(world, data.size(), data.seed)) != stored) {
      throw Error(Errc::FingerprintMismatch,
                  "pair file does not match its regeneration from seed " +
                      std::to_string(data.seed));
    }
    summary["pairs"] = {{"n", data.size()}, {"seed", data.seed}, {"verified", true}};
  }
  const std::string ckpt_path = pick(f.ckpt, c.ckpt_path);
  if (!ckpt_path.empty()) {
    const LoadedCheckpoint loaded = load_checkpoint(ckpt_path);
    summary["checkpoint"] = {{"arch", arch_name(loaded.net.arch)},
                             {"d", loaded.net.config.d},
                             {"depth", loaded.net.depth},
                             {"fc_layers", count_fc_layers(loaded.net)},
                             {"stored_values", stored_values(loaded.net)},
                             {"has_adam_state", loaded.adam.has_value()}};
  }
  const std::string prompts_path = pick(f.prompts, c.prompts_path);
  if (!prompts_path.empty()) {
    const PromptPair p = load_prompts(prompts_path);
    summary["prompts"] = {{"text_source", p.provenance.text_source},
                          {"image_set_size", p.provenance.image_set_size},
                          {"prompt_cosine", cosine_similarity(p.cte_prompt, p.cie_prompt)}};
  }
  const std::string out = pick(f.out, c.out_path);
  if (!out.empty()) {
    write_json(out, summary);
    summary["out"] = out;
  }
  return summary;
}

json error_object(const std::string& code, const std::string& message) {
  return {{"ok", false}, {"error", {{"code", code}, {"message", message}}}};
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Prompt-based cross-modal toolkit over a seeded toy world", "pcmf"};
  app.require_subcommand(1);

  Flags flags;
  struct Entry {
    const char* name;
    const char* help;
    unsigned flags;
    json (*run)(const Flags&);
  };
  const Entry entries[] = {
      {"gen-world", "create a world description", kOut | kSeed, cmd_gen_world},
      {"gen-pairs", "sample (latent, image embedding) pairs", kWorld | kOut | kSeed | kN,
       cmd_gen_pairs},
      {"compute-prompts", "derive the text/image prompt pair",
       kWorld | kPairs | kOut | kSeed | kAttrs, cmd_compute_prompts},
      {"train", "train a projection network", kWorld | kPairs | kCkpt | kOut | kSeed, cmd_train},
      {"eval", "evaluate a checkpoint on the held-out split", kWorld | kPairs | kCkpt | kOut,
       cmd_eval},
      {"translate", "text attributes to a latent through the prompts",
       kWorld | kCkpt | kPrompts | kOut | kAlpha | kAttrs, cmd_translate},
      {"manipulate", "edit a sampled image embedding toward a target text",
       kWorld | kCkpt | kOut | kSeed | kAlpha | kAttrs, cmd_manipulate},
      {"report", "summarize and verify artifacts", kWorld | kPairs | kCkpt | kPrompts | kOut,
       cmd_report},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_flags(sub, flags, e.flags);
    subs.emplace_back(sub, &e);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    out << error_object(errc_name(Errc::UsageError), e.what()).dump() << "\n";
    return kExitUsage;
  }

  for (const auto& [sub, entry] : subs) {
    if (!sub->parsed()) continue;
    flags.sub = sub;
    try {
      json summary = entry->run(flags);
      summary["ok"] = true;
      summary["command"] = entry->name;
      out << summary.dump() << "\n";
      return kExitOk;
    } catch (const Error& e) {
      out << error_object(errc_name(e.code()), e.what()).dump() << "\n";
      return e.code() == Errc::UsageError ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
      out << error_object("Internal", e.what()).dump() << "\n";
      return kExitFailure;
    }
  }
  return kExitUsage;  // unreachable: exactly one subcommand is required
}

}  // namespace pcmf::cli
