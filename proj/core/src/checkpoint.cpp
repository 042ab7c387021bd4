#include "dll/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "dll/error.hpp"

namespace dll {

namespace {

constexpr char kMagic[8] = {'D', 'L', 'L', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(out, bits);
}

void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_widths(std::ostream& out, const std::vector<int>& widths) {
  write_u32(out, static_cast<std::uint32_t>(widths.size()));
  for (int w : widths) write_u32(out, static_cast<std::uint32_t>(w));
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& in) {
  const std::uint64_t bits = read_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string read_string(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  return s;
}

std::vector<int> read_widths(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  std::vector<int> widths(n);
  for (auto& w : widths) w = static_cast<int>(read_u32(in));
  return widths;
}

const ParamGroup& find_group(const Checkpoint& ckpt, const std::string& name) {
  for (const ParamGroup& g : ckpt.groups) {
    if (g.name() == name) return g;
  }
  throw ParseError("checkpoint: missing parameter group '" + name + "'");
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("checkpoint: cannot write '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_string(out, ckpt.kind);
  write_widths(out, ckpt.config.encoder_widths);
  write_widths(out, ckpt.config.embedding_widths);
  write_widths(out, ckpt.config.tower_widths);
  write_u32(out, ckpt.config.hidden_activation == Activation::Relu ? 0 : 1);
  write_u32(out,
            ckpt.config.task == TaskKind::BinaryClassification ? 0 : 1);
  write_u64(out, ckpt.config.seed);
  write_u32(out, static_cast<std::uint32_t>(ckpt.groups.size()));
  for (const ParamGroup& g : ckpt.groups) {
    write_string(out, g.name());
    write_u32(out, static_cast<std::uint32_t>(g.size()));
    for (const auto& [key, tensor] : g.entries()) {
      write_string(out, key);
      write_u32(out, static_cast<std::uint32_t>(tensor.rank()));
      for (std::size_t d : tensor.shape()) write_u64(out, d);
      for (double v : tensor.values()) write_f64(out, v);
    }
  }
  if (!out) throw Error("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("checkpoint: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("checkpoint '" + path + "': bad magic");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw ParseError("checkpoint '" + path + "': unsupported version " +
                     std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.kind = read_string(in);
  ckpt.config.encoder_widths = read_widths(in);
  ckpt.config.embedding_widths = read_widths(in);
  ckpt.config.tower_widths = read_widths(in);
  ckpt.config.hidden_activation =
      read_u32(in) == 0 ? Activation::Relu : Activation::Tanh;
  ckpt.config.task =
      read_u32(in) == 0 ? TaskKind::BinaryClassification : TaskKind::Regression;
  ckpt.config.seed = read_u64(in);
  const std::uint32_t group_count = read_u32(in);
  for (std::uint32_t gi = 0; gi < group_count; ++gi) {
    ParamGroup group(read_string(in));
    const std::uint32_t entry_count = read_u32(in);
    for (std::uint32_t ei = 0; ei < entry_count; ++ei) {
      const std::string key = read_string(in);
      const std::uint32_t rank = read_u32(in);
      std::vector<std::size_t> shape(rank);
      std::size_t total = 1;
      for (auto& d : shape) {
        d = static_cast<std::size_t>(read_u64(in));
        total *= d;
      }
      std::vector<double> values(total);
      for (double& v : values) v = read_f64(in);
      group.insert(key, Tensor(std::move(shape), std::move(values)));
    }
    ckpt.groups.push_back(std::move(group));
  }
  if (!in) throw ParseError("checkpoint '" + path + "': truncated file");
  return ckpt;
}

Checkpoint make_checkpoint(const ModelConfig& config,
                           const DualTowerParams& params) {
  return Checkpoint{"dualtower", config,
                    {params.theta0, params.theta1, params.theta2}};
}

Checkpoint make_checkpoint(const ModelConfig& config,
                           const MultiTaskParams& params) {
  return Checkpoint{"multitask", config,
                    {params.encoder, params.head1, params.head2}};
}

DualTowerParams dual_tower_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "dualtower") {
    throw ParseError("checkpoint: kind '" + ckpt.kind + "', expected dualtower");
  }
  DualTowerParams p;
  p.theta0 = find_group(ckpt, "theta0");
  p.theta1 = find_group(ckpt, "theta1");
  p.theta2 = find_group(ckpt, "theta2");
  return p;
}

MultiTaskParams multitask_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "multitask") {
    throw ParseError("checkpoint: kind '" + ckpt.kind + "', expected multitask");
  }
  MultiTaskParams p;
  p.encoder = find_group(ckpt, "m_encoder");
  p.head1 = find_group(ckpt, "m_head1");
  p.head2 = find_group(ckpt, "m_head2");
  return p;
}

}  // namespace dll
