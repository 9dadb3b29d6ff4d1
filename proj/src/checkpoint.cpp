#include "sensegen/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "sensegen/errors.hpp"

namespace sensegen {

namespace {

constexpr char kMagic[8] = {'S', 'G', 'E', 'N', 'C', 'K', 'P', 'T'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::size_t offset() const { return pos_; }
  bool exhausted() const { return pos_ == bytes_.size(); }

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > bytes_.size()) {
      throw FormatError("checkpoint truncated at offset " + std::to_string(pos_) +
                        " while reading " + what);
    }
  }

  void raw(void* dst, std::size_t n, const char* what) {
    need(n, what);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw FormatError("checkpoint has no tensor named '" + name + "'");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, ckpt.version);
  std::string meta = ckpt.meta.dump();
  put_u64(out, meta.size());
  out += meta;
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, tensor] : ckpt.tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t e : tensor.shape()) put_u64(out, e);
    const double* d = tensor.data();
    for (std::size_t i = 0; i < tensor.size(); ++i) put_f64(out, d[i]);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot write checkpoint '" + path.string() + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("short write to checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open checkpoint '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes));

  char magic[8];
  r.raw(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("bad checkpoint magic at offset 0 in '" + path.string() + "'");
  }
  Checkpoint ckpt;
  ckpt.version = r.u32("version");
  if (ckpt.version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(ckpt.version) +
                      " (supported: " + std::to_string(kCheckpointVersion) + ")");
  }
  std::uint64_t meta_len = r.u64("metadata length");
  std::string meta = r.str(meta_len, "metadata document");
  try {
    ckpt.meta = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint metadata is not valid JSON: " + std::string(e.what()));
  }

  std::uint32_t count = r.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_len = r.u32("tensor name length");
    std::string name = r.str(name_len, "tensor name");
    std::uint32_t rank = r.u32("tensor rank");
    if (rank == 0 || rank > 8) {
      throw FormatError("tensor '" + name + "': implausible rank " + std::to_string(rank) +
                        " at offset " + std::to_string(r.offset()));
    }
    std::vector<std::size_t> shape(rank);
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      std::uint64_t e = r.u64("tensor extent");
      if (e == 0 || e > (1ull << 32)) {
        throw FormatError("tensor '" + name + "': implausible extent " +
                          std::to_string(e) + " at offset " + std::to_string(r.offset()));
      }
      shape[d] = static_cast<std::size_t>(e);
      if (total > (1ull << 40) / shape[d]) {
        throw FormatError("tensor '" + name + "': payload size overflows at offset " +
                          std::to_string(r.offset()));
      }
      total *= shape[d];
    }
    r.need(total * 8, "tensor payload");
    std::vector<double> values(total);
    for (std::size_t v = 0; v < total; ++v) values[v] = r.f64("tensor payload");
    ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!r.exhausted()) {
    throw FormatError("trailing bytes after tensor records at offset " +
                      std::to_string(r.offset()));
  }
  return ckpt;
}

nlohmann::json to_json(const GeneratorConfig& cfg) {
  return {{"lstm_layers", cfg.lstm_layers},
          {"lstm_units", cfg.lstm_units},
          {"fc_units", cfg.fc_units},
          {"mixtures", cfg.mixtures},
          {"head", cfg.head == HeadMode::sigmoid_literal ? "sigmoid" : "linear"},
          {"sigma_floor", cfg.sigma_floor}};
}

nlohmann::json to_json(const DiscriminatorConfig& cfg) {
  return {{"lstm_units", cfg.lstm_units},
          {"fc_units", cfg.fc_units},
          {"window_len", cfg.window_len},
          {"strict_window", cfg.strict_window}};
}

nlohmann::json to_json(const NormRecord& rec) {
  return {{"min", rec.min}, {"max", rec.max}};
}

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  GeneratorConfig cfg;
  cfg.lstm_layers = j.at("lstm_layers").get<std::size_t>();
  cfg.lstm_units = j.at("lstm_units").get<std::size_t>();
  cfg.fc_units = j.at("fc_units").get<std::size_t>();
  cfg.mixtures = j.at("mixtures").get<std::size_t>();
  std::string head = j.at("head").get<std::string>();
  if (head == "sigmoid") {
    cfg.head = HeadMode::sigmoid_literal;
  } else if (head == "linear") {
    cfg.head = HeadMode::linear;
  } else {
    throw FormatError("unknown generator head mode '" + head + "'");
  }
  cfg.sigma_floor = j.at("sigma_floor").get<double>();
  return cfg;
}

DiscriminatorConfig discriminator_config_from_json(const nlohmann::json& j) {
  DiscriminatorConfig cfg;
  cfg.lstm_units = j.at("lstm_units").get<std::size_t>();
  cfg.fc_units = j.at("fc_units").get<std::size_t>();
  cfg.window_len = j.at("window_len").get<std::size_t>();
  cfg.strict_window = j.at("strict_window").get<bool>();
  return cfg;
}

NormRecord norm_record_from_json(const nlohmann::json& j) {
  return NormRecord{j.at("min").get<double>(), j.at("max").get<double>()};
}

namespace {

Checkpoint pack(const std::string& kind, nlohmann::json config,
                std::vector<ParamRef> refs, const nlohmann::json& extra_meta) {
  Checkpoint ckpt;
  ckpt.meta["kind"] = kind;
  ckpt.meta["config"] = std::move(config);
  for (auto it = extra_meta.begin(); it != extra_meta.end(); ++it) {
    ckpt.meta[it.key()] = it.value();
  }
  for (const ParamRef& ref : refs) ckpt.tensors.emplace_back(ref.name, *ref.tensor);
  return ckpt;
}

void require_kind(const Checkpoint& ckpt, const std::string& kind) {
  std::string got = ckpt.meta.value("kind", "");
  if (got != kind) {
    throw FormatError("checkpoint kind is '" + got + "', expected '" + kind + "'");
  }
}

}  // namespace

Checkpoint make_checkpoint(GeneratorModel& model, const nlohmann::json& extra_meta) {
  return pack("generator", to_json(model.config), model.parameters(), extra_meta);
}

Checkpoint make_checkpoint(DiscriminatorModel& model, const nlohmann::json& extra_meta) {
  return pack("discriminator", to_json(model.config), model.parameters(), extra_meta);
}

GeneratorModel generator_from_checkpoint(const Checkpoint& ckpt) {
  require_kind(ckpt, "generator");
  GeneratorConfig cfg = generator_config_from_json(ckpt.meta.at("config"));
  GeneratorModel model = GeneratorModel::zeros(cfg);
  for (ParamRef ref : model.parameters()) {
    const Tensor& stored = ckpt.tensor(ref.name);
    if (!stored.same_shape(*ref.tensor)) {
      throw FormatError("tensor '" + ref.name + "' has shape " + stored.shape_str() +
                        ", expected " + ref.tensor->shape_str());
    }
    *ref.tensor = stored;
  }
  model.validate();
  return model;
}

DiscriminatorModel discriminator_from_checkpoint(const Checkpoint& ckpt) {
  require_kind(ckpt, "discriminator");
  DiscriminatorConfig cfg = discriminator_config_from_json(ckpt.meta.at("config"));
  DiscriminatorModel model = DiscriminatorModel::zeros(cfg);
  for (ParamRef ref : model.parameters()) {
    const Tensor& stored = ckpt.tensor(ref.name);
    if (!stored.same_shape(*ref.tensor)) {
      throw FormatError("tensor '" + ref.name + "' has shape " + stored.shape_str() +
                        ", expected " + ref.tensor->shape_str());
    }
    *ref.tensor = stored;
  }
  model.validate();
  return model;
}

}  // namespace sensegen
