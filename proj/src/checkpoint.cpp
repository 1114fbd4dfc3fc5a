#include "gst/checkpoint.hpp"

#include <cstdio>

namespace gst {

namespace {
const char kMagic[4] = {'G', 'S', 'T', 'C'};
}

void Checkpoint::add(const std::string& name, std::vector<uint8_t> payload) {
  sections.emplace_back(name, std::move(payload));
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, _] : sections)
    if (n == name) return true;
  return false;
}

const std::vector<uint8_t>& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, payload] : sections)
    if (n == name) return payload;
  throw CodecError("checkpoint is missing section '" + name + "'", -1);
}

std::vector<std::string> Checkpoint::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [n, _] : sections)
    if (n.rfind(prefix, 0) == 0) out.push_back(n);
  return out;
}

std::vector<uint8_t> Checkpoint::serialize() const {
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(static_cast<uint32_t>(sections.size()));
  for (const auto& [name, payload] : sections) {
    w.str(name);
    w.u64(payload.size());
    w.bytes(payload.data(), payload.size());
  }
  return w.take();
}

Checkpoint Checkpoint::parse(const std::vector<uint8_t>& bytes) {
  ByteReader r(bytes);
  const uint8_t* magic = r.take(4);
  for (int i = 0; i < 4; ++i)
    if (magic[i] != static_cast<uint8_t>(kMagic[i]))
      throw CodecError("bad checkpoint magic at byte " + std::to_string(i), i);
  uint32_t version = r.u32();
  if (version != kVersion)
    throw CodecError("unsupported checkpoint version " + std::to_string(version) +
                         " at byte 4",
                     4);
  uint32_t count = r.u32();
  Checkpoint cp;
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    uint64_t len = r.u64();
    const uint8_t* p = r.take(len);
    cp.add(name, std::vector<uint8_t>(p, p + len));
  }
  return cp;
}

void Checkpoint::write_file(const std::string& path) const {
  auto bytes = serialize();
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  size_t written = std::fwrite(bytes.data(), 1, bytes.size(), f);
  std::fclose(f);
  if (written != bytes.size())
    throw std::runtime_error("short write to '" + path + "'");
}

Checkpoint Checkpoint::read_file(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::fseek(f, 0, SEEK_END);
  long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  size_t got = std::fread(bytes.data(), 1, bytes.size(), f);
  std::fclose(f);
  if (got != bytes.size()) throw std::runtime_error("short read from '" + path + "'");
  return parse(bytes);
}

void write_mlp(ByteWriter& w, const Mlp& mlp) {
  w.u32(static_cast<uint32_t>(mlp.layers.size()));
  for (size_t l = 0; l < mlp.layers.size(); ++l) {
    const auto& layer = mlp.layers[l];
    const auto& p = *layer.weight.pattern;
    w.u32(static_cast<uint32_t>(p.rows));
    w.u32(static_cast<uint32_t>(p.cols));
    w.u8(static_cast<uint8_t>(p.kind));
    w.u8(static_cast<uint8_t>(p.block));
    w.u8(layer.compressed ? 1 : 0);
    w.u8(static_cast<uint8_t>(mlp.acts[l]));
    w.u32(static_cast<uint32_t>(layer.weight.values.size()));
    w.bytes(layer.weight.values.data(), layer.weight.values.size() * 4);
    w.bytes(layer.weight.mask.data(), layer.weight.mask.size());
    w.u32(static_cast<uint32_t>(layer.bias.size()));
    w.bytes(layer.bias.data(), layer.bias.size() * 4);
  }
}

Mlp read_mlp(ByteReader& r) {
  Mlp mlp;
  uint32_t nlayers = r.u32();
  for (uint32_t l = 0; l < nlayers; ++l) {
    int rows = static_cast<int>(r.u32());
    int cols = static_cast<int>(r.u32());
    auto kind = static_cast<PatternKind>(r.u8());
    int block = r.u8();
    bool compressed = r.u8() != 0;
    auto act = static_cast<Act>(r.u8());

    PatternPtr pattern;
    try {
      pattern = build_pattern(kind, rows, cols, block);
    } catch (const StructureError& e) {
      throw CodecError(std::string("invalid layer pattern at byte ") +
                           std::to_string(r.offset()) + ": " + e.what(),
                       static_cast<long long>(r.offset()));
    }
    CompressedLinear layer;
    layer.weight = CompressedTensor(pattern);
    layer.compressed = compressed;
    uint32_t groups = r.u32();
    if (groups != pattern->group_count)
      throw CodecError("group count mismatch at byte " + std::to_string(r.offset()),
                       static_cast<long long>(r.offset()));
    std::memcpy(layer.weight.values.data(), r.take(groups * 4ull), groups * 4ull);
    std::memcpy(layer.weight.mask.data(), r.take(groups), groups);
    uint32_t bias_len = r.u32();
    layer.bias.resize(bias_len);
    std::memcpy(layer.bias.data(), r.take(bias_len * 4ull), bias_len * 4ull);
    mlp.layers.push_back(std::move(layer));
    mlp.acts.push_back(act);
  }
  return mlp;
}

namespace {
void write_floats(ByteWriter& w, const std::vector<float>& v) {
  w.u32(static_cast<uint32_t>(v.size()));
  w.bytes(v.data(), v.size() * 4);
}
std::vector<float> read_floats(ByteReader& r) {
  uint32_t n = r.u32();
  std::vector<float> v(n);
  std::memcpy(v.data(), r.take(n * 4ull), n * 4ull);
  return v;
}
}  // namespace

void write_optim(ByteWriter& w, const OptimState& opt) {
  w.f64(opt.hp.lr);
  w.f64(opt.hp.beta1);
  w.f64(opt.hp.beta2);
  w.f64(opt.hp.eps);
  w.u64(opt.step);
  w.u32(static_cast<uint32_t>(opt.layers.size()));
  for (const auto& lm : opt.layers) {
    write_floats(w, lm.m_w);
    write_floats(w, lm.v_w);
    write_floats(w, lm.m_b);
    write_floats(w, lm.v_b);
  }
}

OptimState read_optim(ByteReader& r) {
  OptimState opt;
  opt.hp.lr = r.f64();
  opt.hp.beta1 = r.f64();
  opt.hp.beta2 = r.f64();
  opt.hp.eps = r.f64();
  opt.step = r.u64();
  uint32_t nlayers = r.u32();
  for (uint32_t l = 0; l < nlayers; ++l) {
    LayerMoments lm;
    lm.m_w = read_floats(r);
    lm.v_w = read_floats(r);
    lm.m_b = read_floats(r);
    lm.v_b = read_floats(r);
    opt.layers.push_back(std::move(lm));
  }
  return opt;
}

void write_scheduler(ByteWriter& w, const SchedulerState& s) {
  w.f64(s.p_th);
  w.u8(s.r_prev ? 1 : 0);
  w.f64(s.r_prev ? *s.r_prev : 0.0);
  w.u64(s.t);
  w.f64(s.s_now);
  w.u8(static_cast<uint8_t>(s.phase));
  w.u8(s.conversion_done ? 1 : 0);
}

SchedulerState read_scheduler(ByteReader& r) {
  SchedulerState s;
  s.p_th = r.f64();
  bool has_r = r.u8() != 0;
  double r_prev = r.f64();
  if (has_r) s.r_prev = r_prev;
  s.t = r.u64();
  s.s_now = r.f64();
  s.phase = static_cast<Phase>(r.u8());
  s.conversion_done = r.u8() != 0;
  return s;
}

void save_checkpoint(const Mlp& mlp, const OptimState& opt, const SchedulerState& sched,
                     const std::string& path) {
  Checkpoint cp;
  {
    ByteWriter w;
    w.u32(1);
    w.str("model");
    w.u8(1);  // trainable
    cp.add("manifest", w.take());
  }
  {
    ByteWriter w;
    write_mlp(w, mlp);
    cp.add("model:model", w.take());
  }
  {
    ByteWriter w;
    write_optim(w, opt);
    cp.add("optim:model", w.take());
  }
  {
    ByteWriter w;
    write_scheduler(w, sched);
    cp.add("sched", w.take());
  }
  cp.write_file(path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  Checkpoint cp = Checkpoint::read_file(path);
  LoadedCheckpoint out;
  {
    ByteReader r(cp.get("model:model"));
    out.mlp = read_mlp(r);
  }
  {
    ByteReader r(cp.get("optim:model"));
    out.optim = read_optim(r);
  }
  {
    ByteReader r(cp.get("sched"));
    out.scheduler = read_scheduler(r);
  }
  return out;
}

}  // namespace gst
