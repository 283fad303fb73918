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

#include "pcmf/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "pcmf/error.hpp"

namespace pcmf {

void RunConfig::validate() const {
  world.validate();
  c2s.validate();
  train.validate();
  projection.validate();
  if (mlp_layers < 1) throw Error(Errc::RangeError, "mlp_layers must be >= 1");
  if (!(alpha_manipulate >= 0.0)) throw Error(Errc::RangeError, "alpha_manipulate must be >= 0");
  if (prompt_samples < 1) throw Error(Errc::RangeError, "prompt_samples must be >= 1");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void type_error(std::string_view key, std::string_view value, int line,
                             const char* expected) {
  throw Error(Errc::TypeError, "line " + std::to_string(line) + ": " + std::string(key) +
                                   " expects " + expected + ", got '" + std::string(value) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, int line, const char* expected) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) type_error(key, value, line, expected);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view, int)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Access>
Field int_field(std::string key, Access access) {
  return Field{
      key,
      [access, key](RunConfig& c, std::string_view v, int line) {
        auto& slot = access(c);
        using T = std::remove_reference_t<decltype(slot)>;
        slot = parse_number<T>(key, v, line, "an integer");
      },
      [access](const RunConfig& c) {
        return std::to_string(access(const_cast<RunConfig&>(c)));
      }};
}

template <typename Access>
Field real_field(std::string key, Access access) {
  return Field{key,
               [access, key](RunConfig& c, std::string_view v, int line) {
                 const double x = parse_number<double>(key, v, line, "a real number");
                 if (!std::isfinite(x)) type_error(key, v, line, "a finite real number");
                 access(c) = x;
               },
               [access](const RunConfig& c) {
                 return format_double(access(const_cast<RunConfig&>(c)));
               }};
}

template <typename Access>
Field bool_field(std::string key, Access access) {
  return Field{key,
               [access, key](RunConfig& c, std::string_view v, int line) {
                 if (v == "true" || v == "1") {
                   access(c) = true;
                 } else if (v == "false" || v == "0") {
                   access(c) = false;
                 } else {
                   type_error(key, v, line, "true or false");
                 }
               },
               [access](const RunConfig& c) {
                 return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false");
               }};
}

template <typename Access>
Field string_field(std::string key, Access access) {
  return Field{key,
               [access](RunConfig& c, std::string_view v, int) { access(c) = std::string(v); },
               [access](const RunConfig& c) { return access(const_cast<RunConfig&>(c)); }};
}

#define PCMF_ACCESS(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(int_field("world_seed", PCMF_ACCESS(world.seed)));
    f.push_back(int_field("d_z", PCMF_ACCESS(world.d_z)));
    f.push_back(int_field("d_img", PCMF_ACCESS(world.d_img)));
    f.push_back(int_field("d_sem", PCMF_ACCESS(world.d_sem)));
    f.push_back(int_field("d_emb", PCMF_ACCESS(world.d_emb)));
    f.push_back(int_field("hidden", PCMF_ACCESS(world.hidden)));
    f.push_back(real_field("gap_scale", PCMF_ACCESS(world.gap_scale)));
    f.push_back(Field{
        "arch",
        [](RunConfig& c, std::string_view v, int line) {
          if (v == "c2s") {
            c.arch = Architecture::C2S;
          } else if (v == "mlp") {
            c.arch = Architecture::PlainMlp;
          } else {
            type_error("arch", v, line, "c2s or mlp");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.arch == Architecture::C2S ? "c2s" : "mlp");
        }});
    f.push_back(int_field("c2s_width", PCMF_ACCESS(c2s.d)));
    f.push_back(int_field("n_blocks", PCMF_ACCESS(c2s.n_blocks)));
    f.push_back(real_field("dropout_rate", PCMF_ACCESS(c2s.dropout_rate)));
    f.push_back(int_field("mlp_layers", PCMF_ACCESS(mlp_layers)));
    f.push_back(int_field("iterations", PCMF_ACCESS(train.iterations)));
    f.push_back(int_field("batch_size", PCMF_ACCESS(train.batch_size)));
    f.push_back(real_field("lr_max", PCMF_ACCESS(train.lr_max)));
    f.push_back(real_field("lr_min", PCMF_ACCESS(train.lr_min)));
    f.push_back(real_field("lambda_sem_cons", PCMF_ACCESS(train.weights.sem_cons)));
    f.push_back(real_field("lambda_l1", PCMF_ACCESS(train.weights.l1)));
    f.push_back(real_field("lambda_reg", PCMF_ACCESS(train.weights.reg)));
    f.push_back(int_field("data_seed", PCMF_ACCESS(train.data_seed)));
    f.push_back(int_field("init_seed", PCMF_ACCESS(train.init_seed)));
    f.push_back(real_field("holdout_fraction", PCMF_ACCESS(train.holdout_fraction)));
    f.push_back(int_field("n_pairs", PCMF_ACCESS(n_pairs)));
    f.push_back(int_field("pair_seed", PCMF_ACCESS(pair_seed)));
    f.push_back(int_field("prompt_samples", PCMF_ACCESS(prompt_samples)));
    f.push_back(real_field("alpha", PCMF_ACCESS(projection.alpha_translate)));
    f.push_back(real_field("alpha_manipulate", PCMF_ACCESS(alpha_manipulate)));
    f.push_back(bool_field("renormalize_output", PCMF_ACCESS(projection.renormalize_output)));
    f.push_back(string_field("world", PCMF_ACCESS(world_path)));
    f.push_back(string_field("pairs", PCMF_ACCESS(pairs_path)));
    f.push_back(string_field("ckpt", PCMF_ACCESS(ckpt_path)));
    f.push_back(string_field("prompts", PCMF_ACCESS(prompts_path)));
    f.push_back(string_field("out", PCMF_ACCESS(out_path)));
    return f;
  }();
  return table;
}

#undef PCMF_ACCESS

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                           : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::TypeError,
                  "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const Field& f) { return f.key == key; });
    if (it == table.end()) {
      throw Error(Errc::UnknownKey,
                  "line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    it->set(config, value, line_no);
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string render_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

}  // namespace pcmf
