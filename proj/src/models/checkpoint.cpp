#include "sslp/checkpoint.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sslp::nn {

namespace {
constexpr char kMagic[8] = {'S', 'S', 'L', 'P', 'C', 'K', '1', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void read_pod(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

const NamedTensor* CheckpointData::find(const std::string& name) const {
  for (const NamedTensor& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

void save_checkpoint(const std::string& path, const CheckpointData& ck) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    SSLP_CHECK(os, "cannot open for writing: ", tmp);
    os.write(kMagic, sizeof(kMagic));
    write_pod(os, kFormatVersion);
    const std::string manifest = ck.manifest.dump();
    write_pod(os, static_cast<std::uint64_t>(manifest.size()));
    os.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
    write_pod(os, static_cast<std::uint32_t>(ck.tensors.size()));
    for (const NamedTensor& t : ck.tensors) {
      write_pod(os, static_cast<std::uint32_t>(t.name.size()));
      os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
      write_pod(os, static_cast<std::uint32_t>(t.shape.size()));
      for (int d : t.shape) write_pod(os, static_cast<std::int32_t>(d));
      write_pod(os, static_cast<std::uint64_t>(t.data.size()));
      os.write(reinterpret_cast<const char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    }
    SSLP_CHECK(os, "short write to ", tmp);
  }
  std::filesystem::rename(tmp, path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  SSLP_CHECK(is, "cannot open checkpoint: ", path);
  char magic[8];
  is.read(magic, sizeof(magic));
  SSLP_CHECK(is && std::equal(magic, magic + 8, kMagic), "not a checkpoint file: ", path);
  std::uint32_t version = 0;
  read_pod(is, version);
  SSLP_CHECK(version == kFormatVersion, "unsupported checkpoint version ", version, " in ",
             path);

  CheckpointData ck;
  std::uint64_t mlen = 0;
  read_pod(is, mlen);
  std::string manifest(mlen, '\0');
  is.read(manifest.data(), static_cast<std::streamsize>(mlen));
  SSLP_CHECK(is, "truncated manifest in ", path);
  ck.manifest = nlohmann::json::parse(manifest);

  std::uint32_t count = 0;
  read_pod(is, count);
  ck.tensors.resize(count);
  for (NamedTensor& t : ck.tensors) {
    std::uint32_t nlen = 0;
    read_pod(is, nlen);
    t.name.resize(nlen);
    is.read(t.name.data(), nlen);
    std::uint32_t ndim = 0;
    read_pod(is, ndim);
    t.shape.resize(ndim);
    for (std::uint32_t i = 0; i < ndim; ++i) {
      std::int32_t d = 0;
      read_pod(is, d);
      t.shape[i] = d;
    }
    std::uint64_t numel = 0;
    read_pod(is, numel);
    t.data.resize(numel);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(numel * sizeof(float)));
    SSLP_CHECK(is, "truncated tensor '", t.name, "' in ", path);
  }
  return ck;
}

std::vector<NamedTensor> bundle_tensors(ModelBundle& bundle) {
  std::vector<NamedTensor> out;
  std::vector<Param*> params;
  bundle.collect_params(params);
  for (Param* p : params) out.push_back({p->name, p->value.shape, p->value.v});
  std::vector<std::pair<std::string, Tensor*>> state;
  bundle.collect_state(state);
  for (auto& [name, t] : state) out.push_back({name, t->shape, t->v});
  return out;
}

void load_bundle_tensors(ModelBundle& bundle, const CheckpointData& ck) {
  auto restore = [&](const std::string& name, Tensor& dst) {
    const NamedTensor* t = ck.find(name);
    SSLP_CHECK(t, "checkpoint is missing tensor '", name, "'");
    SSLP_CHECK(t->shape == dst.shape, "checkpoint tensor '", name, "' has mismatched shape");
    dst.v = t->data;
  };
  std::vector<Param*> params;
  bundle.collect_params(params);
  for (Param* p : params) restore(p->name, p->value);
  std::vector<std::pair<std::string, Tensor*>> state;
  bundle.collect_state(state);
  for (auto& [name, t] : state) restore(name, *t);
}

nlohmann::json bundle_manifest(const ModelBundle& bundle) {
  return nlohmann::json{
      {"kind", "model"},
      {"method", to_string(bundle.method)},
      {"encoder",
       {{"arch", to_string(bundle.encoder_cfg.arch)},
        {"width", bundle.encoder_cfg.width},
        {"feature_dim", bundle.encoder_cfg.feature_dim}}},
      {"head",
       {{"projector_hidden", bundle.head_cfg.projector_hidden},
        {"projector_out", bundle.head_cfg.projector_out},
        {"predictor_hidden", bundle.head_cfg.predictor_hidden},
        {"use_predictor", bundle.head_cfg.use_predictor}}},
      {"with_prior", bundle.prior != nullptr},
      {"seed", bundle.seed},
      {"param_count", bundle.param_count()},
  };
}

ModelBundle bundle_from_manifest(const nlohmann::json& m) {
  EncoderConfig enc;
  enc.arch = arch_from_string(m.at("encoder").at("arch").get<std::string>());
  enc.width = m.at("encoder").at("width").get<double>();
  enc.feature_dim = m.at("encoder").at("feature_dim").get<int>();
  HeadConfig head;
  head.projector_hidden = m.at("head").at("projector_hidden").get<int>();
  head.projector_out = m.at("head").at("projector_out").get<int>();
  head.predictor_hidden = m.at("head").at("predictor_hidden").get<int>();
  head.use_predictor = m.at("head").at("use_predictor").get<bool>();
  const Method method = method_from_string(m.at("method").get<std::string>());
  const bool with_prior = m.at("with_prior").get<bool>();
  const std::uint64_t seed = m.at("seed").get<std::uint64_t>();
  return init_models(enc, head, method, with_prior, seed);
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  SSLP_CHECK(is, "cannot open for hashing: ", path);
  std::uint64_t h = 0xCBF29CE484222325ull;
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof(buf));
    const std::streamsize got = is.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ull;
    }
  }
  return h;
}

std::string hash_hex(std::uint64_t h, int digits) {
  std::ostringstream os;
  os << std::hex;
  for (int i = digits - 1; i >= 0; --i) os << ((h >> (i * 4)) & 0xF);
  return os.str();
}

}  // namespace sslp::nn
