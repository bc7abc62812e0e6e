#include "glyphforge/nn/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <map>

namespace glyphforge::nn {

using glyphforge::to_string;

namespace {

constexpr std::uint8_t kMagic[4] = {0x43, 0x4E, 0x4E, 0x57};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    auto b = take(2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    auto b = take(4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (in_.size() - pos_ < n) throw FormatError("checkpoint truncated at byte " + std::to_string(pos_));
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic);
  w.u32(ckpt.version);
  w.u32(static_cast<std::uint32_t>(ckpt.entries.size()));
  for (const auto& e : ckpt.entries) {
    if (e.name.size() > UINT16_MAX) throw FormatError("tensor name too long: " + e.name);
    if (e.shape.empty() || e.shape.size() > UINT8_MAX) {
      throw FormatError("tensor '" + e.name + "' has unsupported rank");
    }
    if (checked_numel(e.shape) != e.data.size()) {
      throw FormatError("tensor '" + e.name + "' data does not match its shape");
    }
    w.u16(static_cast<std::uint16_t>(e.name.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(e.name.data()), e.name.size()});
    w.u8(static_cast<std::uint8_t>(e.shape.size()));
    for (std::size_t d : e.shape) w.u32(static_cast<std::uint32_t>(d));
    for (float v : e.data) w.u32(std::bit_cast<std::uint32_t>(v));
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  Checkpoint ckpt;
  ckpt.version = r.u32();
  if (ckpt.version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(ckpt.version));
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t t = 0; t < count; ++t) {
    CheckpointEntry e;
    const std::uint16_t name_len = r.u16();
    auto name = r.take(name_len);
    e.name.assign(name.begin(), name.end());
    const std::uint8_t ndim = r.u8();
    if (ndim == 0) throw FormatError("tensor '" + e.name + "' has rank 0");
    std::size_t numel = 1;
    for (std::uint8_t d = 0; d < ndim; ++d) {
      const std::uint32_t dim = r.u32();
      if (dim == 0) throw FormatError("tensor '" + e.name + "' has a zero dimension");
      e.shape.push_back(dim);
      numel *= dim;
    }
    if (numel > r.remaining() / 4) throw FormatError("checkpoint truncated in tensor '" + e.name + "'");
    e.data.resize(numel);
    for (float& v : e.data) v = std::bit_cast<float>(r.u32());
    ckpt.entries.push_back(std::move(e));
  }
  if (!r.done()) throw FormatError("trailing bytes after the last checkpoint tensor");
  return ckpt;
}

Checkpoint make_checkpoint(const Network& net) {
  Checkpoint ckpt;
  for (const auto& p : net.params()) {
    ckpt.entries.push_back({p.name, p.value.shape(), p.value.values()});
  }
  return ckpt;
}

void apply_checkpoint(Network& net, const Checkpoint& ckpt, LoadMode mode) {
  auto in_scope = [&](std::size_t layer) {
    return mode == LoadMode::strict ||
           net.spec().layers[layer].stage == Stage::feature_extractor;
  };
  std::map<std::string, const CheckpointEntry*> by_name;
  std::vector<std::string> problems;
  for (const auto& e : ckpt.entries) {
    if (!by_name.emplace(e.name, &e).second) problems.push_back("duplicate entry '" + e.name + "'");
  }
  std::vector<std::pair<Parameter<float>*, const CheckpointEntry*>> plan;
  for (auto& p : net.params()) {
    if (!in_scope(p.layer)) {
      by_name.erase(p.name);
      continue;
    }
    auto it = by_name.find(p.name);
    if (it == by_name.end()) {
      problems.push_back("missing '" + p.name + "'");
      continue;
    }
    if (it->second->shape != p.value.shape()) {
      problems.push_back("shape of '" + p.name + "': checkpoint " + to_string(it->second->shape) +
                         ", network " + to_string(p.value.shape()));
    } else {
      plan.emplace_back(&p, it->second);
    }
    by_name.erase(it);
  }
  // Entries left over matched no network parameter. In feature-extractor-only
  // mode the old classifier's entries are expected to be left over.
  for (const auto& [name, entry] : by_name) {
    if (mode == LoadMode::strict) {
      problems.push_back("unexpected '" + name + "'");
    } else if (!net.find(name)) {
      bool classifier_like = false;
      for (const auto& layer : net.spec().layers) {
        if (layer.stage == Stage::classifier && name.rfind(layer.name + ".", 0) == 0) {
          classifier_like = true;
        }
      }
      if (!classifier_like) problems.push_back("unexpected '" + name + "'");
    }
  }
  if (!problems.empty()) {
    std::string msg = "checkpoint does not match network:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw CheckpointError(msg);
  }
  for (auto& [param, entry] : plan) {
    std::copy(entry->data.begin(), entry->data.end(), param->value.data().begin());
  }
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(make_checkpoint(net));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

void load_checkpoint(Network& net, const std::filesystem::path& path, LoadMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  apply_checkpoint(net, decode_checkpoint(bytes), mode);
}

}  // namespace glyphforge::nn
