//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_MODEL_CHECKPOINT_HPP
#define CLIFFMASK_MODEL_CHECKPOINT_HPP

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cliffmask/core/error.hpp"
#include "cliffmask/core/log.hpp"
#include "cliffmask/model/vit.hpp"

namespace cliffmask::model {

// Checkpoint layout: one JSON header line (version, dtype, config, head
// widths, named entry shapes in declaration order) followed by the raw
// little-endian parameter payload. Reruns of a deterministic training job
// produce byte-identical files.

namespace detail {

template <typename T>
const char* dtype_name();
template <>
inline const char* dtype_name<float>() {
  return "f32";
}
template <>
inline const char* dtype_name<double>() {
  return "f64";
}

}  // namespace detail

template <typename T>
inline void save_checkpoint(const VitModel<T>& m, const std::string& path) {
  const EncoderConfig& cfg = m.config();
  const HeadWidths& hw = m.head_widths();
  nlohmann::json j;
  j["format"] = "cliffmask-checkpoint";
  j["version"] = 1;
  j["dtype"] = detail::dtype_name<T>();
  j["config"] = {{"image_size", cfg.image_size},
                 {"patch_size", cfg.patch_size},
                 {"embed_dim", cfg.embed_dim},
                 {"depth", cfg.depth},
                 {"heads", cfg.heads},
                 {"mlp_ratio", cfg.mlp_ratio},
                 {"seed", cfg.seed}};
  j["heads"] = {{"atom", hw.atom},
                {"bond", hw.bond},
                {"motif", hw.motif},
                {"regression", hw.regression}};
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.params().entries()) {
    entries.push_back({{"name", e.name}, {"shape", e.shape}});
  }
  j["entries"] = entries;
  j["payload_bytes"] = m.params().size() * sizeof(T);

  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::kIoError, "cannot write checkpoint " + path);
  out << j.dump() << "\n";
  const std::vector<T>& data = m.params().flat_data();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(T)));
  if (!out) raise(Errc::kIoError, "checkpoint write failed: " + path);
}

namespace detail {

inline nlohmann::json read_header(std::ifstream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) {
    raise(Errc::kIoError, "checkpoint truncated: " + path);
  }
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || j.value("format", "") != "cliffmask-checkpoint") {
    raise(Errc::kIoError, "not a checkpoint file: " + path);
  }
  if (j.value("version", 0) != 1) {
    raise(Errc::kIoError, "unsupported checkpoint version in " + path);
  }
  return j;
}

inline EncoderConfig config_from_json(const nlohmann::json& c) {
  EncoderConfig cfg;
  cfg.image_size = c.at("image_size").get<int>();
  cfg.patch_size = c.at("patch_size").get<int>();
  cfg.embed_dim = c.at("embed_dim").get<int>();
  cfg.depth = c.at("depth").get<int>();
  cfg.heads = c.at("heads").get<int>();
  cfg.mlp_ratio = c.at("mlp_ratio").get<int>();
  cfg.seed = c.at("seed").get<std::uint64_t>();
  return cfg;
}

}  // namespace detail

// Exact restore: the model is rebuilt from the stored config + head widths.
template <typename T>
inline VitModel<T> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::kIoError, "cannot open checkpoint " + path);
  nlohmann::json j = detail::read_header(in, path);
  if (j.value("dtype", "") != detail::dtype_name<T>()) {
    raise(Errc::kIoError, "checkpoint dtype is " + j.value("dtype", "?") +
                              ", expected " + detail::dtype_name<T>());
  }
  EncoderConfig cfg = detail::config_from_json(j.at("config"));
  HeadWidths hw;
  hw.atom = j.at("heads").at("atom").get<int>();
  hw.bond = j.at("heads").at("bond").get<int>();
  hw.motif = j.at("heads").at("motif").get<int>();
  hw.regression = j.at("heads").at("regression").get<bool>();
  VitModel<T> m(cfg, hw);
  const auto& want = j.at("entries");
  if (want.size() != static_cast<std::size_t>(m.params().num_entries())) {
    raise(Errc::kIoError, "checkpoint entry table mismatch");
  }
  for (int i = 0; i < m.params().num_entries(); ++i) {
    const auto& e = m.params().entry(i);
    const auto& we = want[static_cast<std::size_t>(i)];
    if (we.at("name").get<std::string>() != e.name ||
        we.at("shape").get<std::vector<int>>() != e.shape) {
      raise(Errc::kIoError, "checkpoint entry mismatch at '" + e.name + "'");
    }
  }
  std::vector<T>& data = m.params().flat_data();
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(T)));
  if (in.gcount() !=
      static_cast<std::streamsize>(data.size() * sizeof(T))) {
    raise(Errc::kIoError, "checkpoint payload truncated: " + path);
  }
  return m;
}

// Warm start: copy same-name/same-shape tensors (the shared encoder trunk)
// into an already-built model; task heads absent from the file keep their
// fresh initialization.
template <typename T>
inline int warm_start(VitModel<T>& m, const std::string& path) {
  VitModel<T> src = load_checkpoint<T>(path);
  if (src.config().image_size != m.config().image_size ||
      src.config().patch_size != m.config().patch_size ||
      src.config().embed_dim != m.config().embed_dim ||
      src.config().depth != m.config().depth ||
      src.config().heads != m.config().heads ||
      src.config().mlp_ratio != m.config().mlp_ratio) {
    raise(Errc::kShapeMismatch, "encoder config differs from checkpoint");
  }
  int copied = 0;
  for (int i = 0; i < m.params().num_entries(); ++i) {
    const auto& e = m.params().entry(i);
    int si = src.params().find(e.name);
    if (si < 0 || src.params().entry(si).shape != e.shape) continue;
    std::memcpy(m.params().data(i), src.params().data(si),
                e.size * sizeof(T));
    ++copied;
  }
  if (copied == 0) raise(Errc::kIoError, "no matching tensors in " + path);
  log_debug("warm start copied " + std::to_string(copied) + " tensors");
  return copied;
}

}  // namespace cliffmask::model

#endif  // CLIFFMASK_MODEL_CHECKPOINT_HPP
