#include "gcs/surrogate/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "gcs/common/error.hpp"
#include "gcs/common/fileio.hpp"
#include "gcs/common/hash.hpp"

namespace gcs::surrogate {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'G', 'C', 'S', 'C', 'K', 'P', 'T', '\0'};

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("checkpoint is truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string serialize_checkpoint(const SurrogateNet& net) {
  net.validate_metadata();
  nlohmann::json h;
  h["spec"] = net.spec().to_json();
  h["spec_digest"] = net.spec().digest();
  h["target"] = std::string(target_name(net.spec().target));
  if (net.pressure_norm) {
    h["pressure_norm"] = {{"mean", net.pressure_norm->mean}, {"std", net.pressure_norm->stddev}};
  } else {
    h["pressure_norm"] = nullptr;
  }
  h["input_scale"] = net.input_scale;
  h["output_times"] = net.output_times;
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, v] : net.parameters().entries()) tensors.push_back({{"name", name}, {"shape", v.shape()}});
  h["tensors"] = tensors;
  const std::string header = h.dump();

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, header.size());
  out += header;
  for (const auto& e : net.parameters().entries()) {
    const auto& d = e.second.value().data;
    out.append(reinterpret_cast<const char*>(d.data()), d.size() * sizeof(double));
  }
  put<std::uint64_t>(out, fnv1a(std::string_view(out)));
  return out;
}

SurrogateNet deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a network checkpoint (bad magic)");
  }
  std::size_t pos = sizeof(kMagic);
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto hlen = take<std::uint64_t>(bytes, pos);
  if (pos + hlen + sizeof(std::uint64_t) > bytes.size()) throw IoError("checkpoint is truncated");
  const std::size_t body_end = bytes.size() - sizeof(std::uint64_t);
  std::size_t cpos = body_end;
  if (take<std::uint64_t>(bytes, cpos) != fnv1a(std::string_view(bytes.data(), body_end))) {
    throw IoError("checkpoint checksum mismatch");
  }
  const auto h = nlohmann::json::parse(bytes.substr(pos, hlen));
  pos += hlen;
  const NetSpec spec = NetSpec::from_json(h.at("spec"));
  if (h.at("spec_digest").get<std::uint64_t>() != spec.digest()) throw IoError("checkpoint spec digest mismatch");
  SurrogateNet net(spec);
  net.input_scale = h.at("input_scale").get<std::vector<double>>();
  net.output_times = h.at("output_times").get<std::vector<double>>();
  if (h.at("pressure_norm").is_null()) {
    net.pressure_norm.reset();
  } else {
    net.pressure_norm = NormStats{h["pressure_norm"].at("mean").get<double>(), h["pressure_norm"].at("std").get<double>()};
  }
  const auto& tensors = h.at("tensors");
  auto& entries = net.parameters().entries();
  if (tensors.size() != entries.size()) throw IoError("checkpoint tensor count does not match its spec");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    nn::Var v = entries[i].second;
    if (tensors[i].at("name").get<std::string>() != entries[i].first ||
        tensors[i].at("shape").get<nn::Shape>() != v.shape()) {
      throw IoError("checkpoint tensor '" + entries[i].first + "' does not match its spec");
    }
    const std::size_t nbytes = v.size() * sizeof(double);
    if (pos + nbytes > body_end) throw IoError("checkpoint is truncated");
    std::memcpy(v.mutable_value().data.data(), bytes.data() + pos, nbytes);
    pos += nbytes;
  }
  if (pos != body_end) throw IoError("checkpoint has trailing bytes");
  net.validate_metadata();
  return net;
}

void save_checkpoint(const SurrogateNet& net, const std::filesystem::path& path) {
  atomic_write_file(path, serialize_checkpoint(net));
}

SurrogateNet load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

}  // namespace gcs::surrogate
