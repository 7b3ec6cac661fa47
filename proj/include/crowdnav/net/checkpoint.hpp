#pragma once

// Tensor container:
//   "CNAVCKPT"  u32 version  u64 header_len  <JSON header>  <payload>
// The header lists dims, tensor names/shapes/offsets and free-form metadata;
// the payload is row-major little-endian float64.

#include "crowdnav/errors.hpp"
#include "crowdnav/json_fields.hpp"
#include "crowdnav/net/batch.hpp"
#include "crowdnav/net/param_set.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace crowdnav::net {

inline constexpr char kCheckpointMagic[8] = {'C', 'N', 'A', 'V', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

inline Json dims_to_json(const NetworkDims& d) {
  return {{"kind", to_string(d.kind)},
          {"rnn_size", d.rnn_size},
          {"attention_size", d.attention_size},
          {"embed_size", d.embed_size}};
}

inline NetworkDims read_dims(FieldReader r) {
  NetworkDims d;
  r.read_enum("kind", d.kind, parse_network_kind, "ds_rnn, rnn_attn")
      .read("rnn_size", d.rnn_size)
      .read("attention_size", d.attention_size)
      .read("embed_size", d.embed_size);
  r.reject_unknown();
  try {
    d.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(r.field_path(e.field()), "must be >= 1");
  }
  return d;
}

struct Checkpoint {
  NetworkDims dims;
  ParamSet tensors;
  Json meta = Json::object();
};

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Json header;
  header["format_version"] = kCheckpointVersion;
  header["dims"] = dims_to_json(ckpt.dims);
  header["meta"] = ckpt.meta;
  Json tensors = Json::array();
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < ckpt.tensors.size(); ++i) {
    const MatrixXd& t = ckpt.tensors[i];
    tensors.push_back({{"name", ckpt.tensors.name(i)}, {"shape", {t.rows(), t.cols()}}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(t.size());
  }
  header["tensors"] = std::move(tensors);
  header["payload_count"] = offset;
  const std::string text = header.dump();

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open " + tmp.string() + " for writing");
    const std::uint32_t version = kCheckpointVersion;
    const std::uint64_t header_len = text.size();
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&header_len), sizeof header_len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (std::size_t i = 0; i < ckpt.tensors.size(); ++i) {
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = ckpt.tensors[i];
      out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
    }
    if (!out) throw CheckpointError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string where = path.string() + ": ";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(where + "cannot open checkpoint");

  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t header_len = 0;
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw CheckpointError(where + "bad magic (not a crowdnav checkpoint)");
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
  if (!in) throw CheckpointError(where + "truncated preamble");
  if (version != kCheckpointVersion)
    throw CheckpointError(where + "unsupported format version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  if (header_len > (std::uint64_t{1} << 30)) throw CheckpointError(where + "implausible header length");
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw CheckpointError(where + "truncated header");

  Json header;
  try {
    header = Json::parse(text);
  } catch (const Json::exception& e) {
    throw CheckpointError(where + "header is not valid JSON: " + e.what());
  }

  Checkpoint ckpt;
  try {
    if (header.at("format_version").get<std::uint32_t>() != version)
      throw CheckpointError(where + "header format_version disagrees with preamble");
    ckpt.dims = read_dims(FieldReader(header.at("dims"), "dims"));
    if (header.contains("meta")) ckpt.meta = header.at("meta");
    const std::uint64_t total = header.at("payload_count").get<std::uint64_t>();
    std::vector<double> payload(total);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(total * sizeof(double)));
    if (!in) throw CheckpointError(where + "payload truncated (expected " + std::to_string(total) + " values)");
    in.peek();
    if (!in.eof()) throw CheckpointError(where + "trailing bytes after payload");

    for (const Json& t : header.at("tensors")) {
      const std::string name = t.at("name").get<std::string>();
      const auto shape = t.at("shape").get<std::vector<std::int64_t>>();
      const std::uint64_t offset = t.at("offset").get<std::uint64_t>();
      if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0)
        throw CheckpointError(where + "tensor '" + name + "' has an invalid shape");
      const auto count = static_cast<std::uint64_t>(shape[0] * shape[1]);
      if (offset + count > total) throw CheckpointError(where + "tensor '" + name + "' overruns the payload");
      const std::size_t idx = ckpt.tensors.add(name, shape[0], shape[1]);
      ckpt.tensors[idx] = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          payload.data() + offset, shape[0], shape[1]);
    }
  } catch (const Json::exception& e) {
    throw CheckpointError(where + "header schema: " + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(where + "header schema: " + e.what());
  } catch (const ContractViolation& e) {
    throw CheckpointError(where + e.what());
  }
  return ckpt;
}

/// Names the first difference between a loaded tensor set and the expected layout.
inline void require_layout(const ParamSet& expected, const ParamSet& got, const std::string& what) {
  if (expected.size() != got.size())
    throw CheckpointError(what + ": expected " + std::to_string(expected.size()) + " tensors, found " +
                          std::to_string(got.size()));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected.name(i) != got.name(i))
      throw CheckpointError(what + ": tensor " + std::to_string(i) + " is '" + got.name(i) + "', expected '" +
                            expected.name(i) + "'");
    if (expected[i].rows() != got[i].rows() || expected[i].cols() != got[i].cols())
      throw CheckpointError(what + ": tensor '" + got.name(i) + "' has shape " + std::to_string(got[i].rows()) + "x" +
                            std::to_string(got[i].cols()) + ", expected " + std::to_string(expected[i].rows()) + "x" +
                            std::to_string(expected[i].cols()));
  }
}

}  // namespace crowdnav::net
