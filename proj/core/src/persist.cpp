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

#include "pcmf/persist.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pcmf/error.hpp"

namespace pcmf {

using nlohmann::json;

namespace {

constexpr char kCheckpointMagic[4] = {'P', 'C', 'M', 'F'};
constexpr char kPairsMagic[4] = {'P', 'C', 'M', 'D'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(const Bytes& b) : bytes_(b) {}

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(Errc::TruncatedFile, "file ends unexpectedly");
  }
  // Checks for `count` items of `width` bytes without overflowing the product.
  void need_items(std::uint64_t count, std::uint64_t width) const {
    if (width != 0 && count > remaining() / width) {
      throw Error(Errc::TruncatedFile, "file ends unexpectedly");
    }
  }
  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const Bytes& bytes_;
  std::size_t pos_ = 0;
};

void expect_magic(Reader& r, const char (&magic)[4], const char* what) {
  char got[4];
  if (r.remaining() < 4) throw Error(Errc::TruncatedFile, std::string(what) + ": too short");
  r.raw(got, 4);
  if (std::memcmp(got, magic, 4) != 0) {
    throw Error(Errc::BadMagic, std::string(what) + ": bad magic bytes");
  }
}

void write_tensor(Writer& w, const std::string& name, const Matrix& value, int rank) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.raw(name.data(), name.size());
  w.u32(static_cast<std::uint32_t>(rank));
  if (rank == 2) {
    w.u32(static_cast<std::uint32_t>(value.rows()));
    w.u32(static_cast<std::uint32_t>(value.cols()));
  } else {
    w.u32(static_cast<std::uint32_t>(value.size()));
  }
  for (Eigen::Index i = 0; i < value.size(); ++i) w.f32(value.data()[i]);
}

struct RawTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<double> data;
};

RawTensor read_tensor(Reader& r) {
  RawTensor t;
  const std::uint32_t name_len = r.u32();
  r.need(name_len);
  t.name.resize(name_len);
  r.raw(t.name.data(), name_len);
  const std::uint32_t rank = r.u32();
  if (rank > 2) throw Error(Errc::ShapeMismatch, "tensor " + t.name + " has rank > 2");
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    t.dims.push_back(r.u32());
    r.need_items(t.dims.back(), 4 * count);
    count *= t.dims.back();
  }
  r.need_items(count, 4);
  t.data.resize(count);
  for (auto& v : t.data) v = r.f32();
  return t;
}

void assign_tensor(const RawTensor& t, const std::string& expected_name, Matrix& target,
                   int rank) {
  const bool shape_ok =
      t.name == expected_name && static_cast<int>(t.dims.size()) == rank &&
      (rank == 2 ? (t.dims[0] == target.rows() && t.dims[1] == target.cols())
                 : t.dims[0] == target.size());
  if (!shape_ok) {
    throw Error(Errc::ShapeMismatch,
                "tensor '" + t.name + "' does not match expected '" + expected_name + "'");
  }
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    target.data()[i] = t.data[static_cast<std::size_t>(i)];
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Checkpoints

Bytes encode_checkpoint(const C2SNetwork& net, const nn::AdamState* adam) {
  const nn::ParamStore& ps = net.net.params();
  Writer w;
  w.raw(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(net.arch));
  w.u32(static_cast<std::uint32_t>(net.config.d));
  w.u32(static_cast<std::uint32_t>(net.arch == Architecture::C2S ? net.config.n_blocks
                                                                  : net.depth));
  w.f64(net.config.dropout_rate);

  const std::size_t count = ps.size() + (adam != nullptr ? 1 + 2 * ps.size() : 0);
  w.u32(static_cast<std::uint32_t>(count));
  for (const auto& p : ps) write_tensor(w, p.name, p.value, p.rank);
  if (adam != nullptr) {
    if (adam->m.size() != ps.size() || adam->v.size() != ps.size()) {
      throw Error(Errc::ShapeMismatch, "Adam state does not match the network");
    }
    write_tensor(w, "adam.t", Matrix::Constant(1, 1, static_cast<double>(adam->t)), 1);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      write_tensor(w, "adam.m/" + ps[i].name, adam->m[i], ps[i].rank);
    }
    for (std::size_t i = 0; i < ps.size(); ++i) {
      write_tensor(w, "adam.v/" + ps[i].name, adam->v[i], ps[i].rank);
    }
  }
  return w.take();
}

LoadedCheckpoint decode_checkpoint(const Bytes& bytes) {
  Reader r(bytes);
  expect_magic(r, kCheckpointMagic, "checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(Errc::VersionMismatch,
                "checkpoint version " + std::to_string(version) + " is not supported");
  }
  const std::uint32_t arch = r.u32();
  const std::uint32_t d = r.u32();
  const std::uint32_t depth = r.u32();
  const double dropout = r.f64();

  // Parameters are overwritten below; the seed only fills the initial values.
  SeededRng rng(0);
  LoadedCheckpoint out;
  if (arch == static_cast<std::uint32_t>(Architecture::C2S)) {
    out.net = build_c2s(C2SConfig{static_cast<int>(d), static_cast<int>(depth), dropout}, rng);
  } else if (arch == static_cast<std::uint32_t>(Architecture::PlainMlp)) {
    out.net = build_plain_mlp(static_cast<int>(d), static_cast<int>(depth), rng);
  } else {
    throw Error(Errc::ShapeMismatch, "checkpoint names an unknown architecture");
  }

  nn::ParamStore& ps = out.net.net.params();
  const std::uint32_t count = r.u32();
  const bool with_adam = count == 1 + 3 * ps.size();
  if (count != ps.size() && !with_adam) {
    throw Error(Errc::ShapeMismatch, "checkpoint holds " + std::to_string(count) +
                                         " tensors; the configured network has " +
                                         std::to_string(ps.size()));
  }
  for (std::size_t i = 0; i < ps.size(); ++i) {
    assign_tensor(read_tensor(r), ps[i].name, ps[i].value, ps[i].rank);
  }
  if (with_adam) {
    nn::AdamState adam = nn::AdamState::zeros_like(ps);
    Matrix t(1, 1);
    assign_tensor(read_tensor(r), "adam.t", t, 1);
    adam.t = static_cast<std::uint64_t>(t(0, 0));
    for (std::size_t i = 0; i < ps.size(); ++i) {
      assign_tensor(read_tensor(r), "adam.m/" + ps[i].name, adam.m[i], ps[i].rank);
    }
    for (std::size_t i = 0; i < ps.size(); ++i) {
      assign_tensor(read_tensor(r), "adam.v/" + ps[i].name, adam.v[i], ps[i].rank);
    }
    out.adam = std::move(adam);
  }
  return out;
}

void save_checkpoint(const C2SNetwork& net, const std::string& path, const nn::AdamState* adam) {
  write_file(path, encode_checkpoint(net, adam));
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file(path));
}

// ---------------------------------------------------------------------------
// Pair datasets

Bytes encode_pairs(const PairDataset& data) {
  Writer w;
  w.raw(kPairsMagic, 4);
  w.u32(kPairsVersion);
  w.u32(static_cast<std::uint32_t>(data.d_z));
  w.u32(static_cast<std::uint32_t>(data.d_emb));
  w.u64(data.size());
  w.u64(data.world_fingerprint);
  w.u64(data.seed);
  for (Eigen::Index i = 0; i < data.se.rows(); ++i) {
    for (Eigen::Index k = 0; k < data.se.cols(); ++k) w.f32(data.se(i, k));
    for (Eigen::Index k = 0; k < data.cie.cols(); ++k) w.f32(data.cie(i, k));
  }
  return w.take();
}

PairDataset decode_pairs(const Bytes& bytes) {
  Reader r(bytes);
  expect_magic(r, kPairsMagic, "pair dataset");
  const std::uint32_t version = r.u32();
  if (version != kPairsVersion) {
    throw Error(Errc::VersionMismatch,
                "pair dataset version " + std::to_string(version) + " is not supported");
  }
  PairDataset data;
  data.d_z = static_cast<int>(r.u32());
  data.d_emb = static_cast<int>(r.u32());
  const std::uint64_t n = r.u64();
  data.world_fingerprint = r.u64();
  data.seed = r.u64();
  r.need_items(n, static_cast<std::uint64_t>(data.d_z + data.d_emb) * 4);
  data.se.resize(static_cast<Eigen::Index>(n), data.d_z);
  data.cie.resize(static_cast<Eigen::Index>(n), data.d_emb);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    for (Eigen::Index k = 0; k < data.d_z; ++k) data.se(i, k) = r.f32();
    for (Eigen::Index k = 0; k < data.d_emb; ++k) data.cie(i, k) = r.f32();
  }
  return data;
}

void save_pairs(const PairDataset& data, const std::string& path) {
  write_file(path, encode_pairs(data));
}

PairDataset load_pairs(const std::string& path) { return decode_pairs(read_file(path)); }

// ---------------------------------------------------------------------------
// JSON documents

namespace {

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

std::uint64_t parse_hex64(const std::string& s) {
  std::size_t used = 0;
  const std::uint64_t v = std::stoull(s, &used, 16);
  if (used != s.size()) throw Error(Errc::TypeError, "malformed fingerprint " + s);
  return v;
}

template <typename F>
auto json_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(Errc::TypeError, std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

json world_to_json(const ToyWorld& world) {
  const ToyWorldConfig& c = world.config();
  return json{{"format", "pcmf-world"},
              {"version", 1},
              {"config",
               {{"seed", c.seed},
                {"d_z", c.d_z},
                {"d_img", c.d_img},
                {"d_sem", c.d_sem},
                {"d_emb", c.d_emb},
                {"hidden", c.hidden},
                {"gap_scale", c.gap_scale}}},
              {"fingerprint", hex64(world.fingerprint())}};
}

ToyWorld world_from_json(const json& doc) {
  return json_guard("world file", [&] {
    if (doc.at("format").get<std::string>() != "pcmf-world") {
      throw Error(Errc::BadMagic, "not a world document");
    }
    const json& c = doc.at("config");
    ToyWorldConfig cfg;
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.d_z = c.at("d_z").get<int>();
    cfg.d_img = c.at("d_img").get<int>();
    cfg.d_sem = c.at("d_sem").get<int>();
    cfg.d_emb = c.at("d_emb").get<int>();
    cfg.hidden = c.at("hidden").get<int>();
    cfg.gap_scale = c.at("gap_scale").get<double>();
    ToyWorld world(cfg);
    if (world.fingerprint() != parse_hex64(doc.at("fingerprint").get<std::string>())) {
      throw Error(Errc::FingerprintMismatch, "regenerated world does not match its fingerprint");
    }
    return world;
  });
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  write_file(path, Bytes(text.begin(), text.end()));
}

json read_json(const std::string& path) {
  const Bytes b = read_file(path);
  try {
    return json::parse(b.begin(), b.end());
  } catch (const json::exception& e) {
    throw Error(Errc::TypeError, path + ": " + e.what());
  }
}

}  // namespace

void save_world(const ToyWorld& world, const std::string& path) {
  write_text(path, world_to_json(world).dump(2) + "\n");
}

ToyWorld load_world(const std::string& path) { return world_from_json(read_json(path)); }

json prompts_to_json(const PromptPair& prompts, std::uint64_t world_fingerprint) {
  return json{{"format", "pcmf-prompts"},
              {"version", 1},
              {"world_fingerprint", hex64(world_fingerprint)},
              {"cte_prompt", vector_json(prompts.cte_prompt.values())},
              {"cie_prompt", vector_json(prompts.cie_prompt.values())},
              {"provenance",
               {{"text_source", prompts.provenance.text_source},
                {"image_set_size", prompts.provenance.image_set_size}}}};
}

PromptPair prompts_from_json(const json& doc) {
  return json_guard("prompts file", [&] {
    if (doc.at("format").get<std::string>() != "pcmf-prompts") {
      throw Error(Errc::BadMagic, "not a prompts document");
    }
    PromptProvenance prov{doc.at("provenance").at("text_source").get<std::string>(),
                          doc.at("provenance").at("image_set_size").get<std::size_t>()};
    return PromptPair(Embedding(vector_from_json(doc.at("cte_prompt")), Modality::Text),
                      Embedding(vector_from_json(doc.at("cie_prompt")), Modality::Image),
                      std::move(prov));
  });
}

void save_prompts(const PromptPair& prompts, std::uint64_t world_fingerprint,
                  const std::string& path) {
  write_text(path, prompts_to_json(prompts, world_fingerprint).dump(2) + "\n");
}

PromptPair load_prompts(const std::string& path) { return prompts_from_json(read_json(path)); }

json metrics_to_json(const Metrics& m, bool include_history) {
  json out{{"mean_cie_cosine_distance", m.mean_cie_cosine_distance},
           {"mean_abs_mean_of_se_pred", m.mean_abs_mean_of_se_pred},
           {"mean_abs_std_minus_one", m.mean_abs_std_minus_one},
           {"iterations", m.history.size()}};
  if (!m.history.empty()) {
    const HistoryEntry& last = m.history.back();
    out["final_loss"] = {{"total", last.total},
                         {"sem_cons", last.sem_cons},
                         {"l1", last.l1},
                         {"reg", last.reg},
                         {"lr", last.lr}};
  }
  if (include_history) {
    json h = json::array();
    for (const auto& e : m.history) h.push_back({e.total, e.sem_cons, e.l1, e.reg, e.lr});
    out["history_columns"] = {"total", "sem_cons", "l1", "reg", "lr"};
    out["history"] = std::move(h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

}  // namespace pcmf
