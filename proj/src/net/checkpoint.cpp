#include "corrmap/net/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"

namespace corrmap::net {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'C', 'M', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) { out.write((const char*)&v, 4); }

uint32_t read_u32(std::istream& in, const std::string& path) {
  uint32_t v = 0;
  in.read((char*)&v, 4);
  if (!in) throw InputError(fmt::format("corrupt checkpoint (truncated): {}", path));
  return v;
}

json read_header(std::istream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw InputError(fmt::format("corrupt checkpoint (bad magic): {}", path));
  const uint32_t ver = read_u32(in, path);
  if (ver != kVersion)
    throw InputError(fmt::format("unsupported checkpoint version {} in {}", ver, path));
  const uint32_t jl = read_u32(in, path);
  std::string js(jl, '\0');
  in.read(js.data(), jl);
  if (!in) throw InputError(fmt::format("corrupt checkpoint (truncated): {}", path));
  try {
    return json::parse(js);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("corrupt checkpoint (bad header JSON): {}", path));
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model,
                     const json& extra) {
  json header = extra;
  header["model"] = model.config().to_json();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError(fmt::format("cannot write checkpoint: {}", path));
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    const std::string js = header.dump();
    write_u32(out, (uint32_t)js.size());
    out.write(js.data(), (std::streamsize)js.size());
    write_u32(out, (uint32_t)model.params().size());
    for (const auto& [name, t] : model.params()) {
      write_u32(out, (uint32_t)name.size());
      out.write(name.data(), (std::streamsize)name.size());
      write_u32(out, (uint32_t)t.shape().size());
      for (int d : t.shape()) write_u32(out, (uint32_t)d);
      out.write((const char*)t.data(), (std::streamsize)(t.numel() * 4));
    }
    if (!out) throw InputError(fmt::format("checkpoint write failed: {}", path));
  }
  fs::rename(tmp, path);
}

json checkpoint_info(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open checkpoint: {}", path));
  return read_header(in, path);
}

void load_checkpoint_into(const std::string& path, Model& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open checkpoint: {}", path));
  read_header(in, path);

  const uint32_t np = read_u32(in, path);
  std::map<std::string, bool> seen;
  for (auto& [k, v] : model.params()) seen[k] = false;

  for (uint32_t i = 0; i < np; ++i) {
    const uint32_t nl = read_u32(in, path);
    std::string name(nl, '\0');
    in.read(name.data(), nl);
    const uint32_t nd = read_u32(in, path);
    std::vector<int> shape(nd);
    int64_t numel = 1;
    for (uint32_t d = 0; d < nd; ++d) {
      shape[d] = (int)read_u32(in, path);
      numel *= shape[d];
    }
    auto it = model.params().find(name);
    if (it == model.params().end())
      throw InputError(fmt::format(
          "checkpoint/config mismatch: file has parameter '{}' the model does "
          "not ({})",
          name, path));
    if (it->second.shape() != shape) {
      std::string want, got;
      for (int d : it->second.shape()) want += fmt::format("{},", d);
      for (int d : shape) got += fmt::format("{},", d);
      throw InputError(fmt::format(
          "checkpoint/config mismatch at parameter '{}': model shape [{}] vs "
          "file shape [{}]",
          name, want, got));
    }
    in.read((char*)it->second.data(), (std::streamsize)(numel * 4));
    if (!in)
      throw InputError(fmt::format("corrupt checkpoint (truncated at '{}'): {}",
                                   name, path));
    seen[name] = true;
  }
  for (const auto& [k, v] : seen)
    if (!v)
      throw InputError(fmt::format(
          "checkpoint/config mismatch: model parameter '{}' missing from {}", k,
          path));
}

Model load_checkpoint(const std::string& path) {
  const json header = checkpoint_info(path);
  if (!header.contains("model"))
    throw InputError(fmt::format("checkpoint lacks a model config: {}", path));
  Model m(ModelConfig::from_json(header["model"]), /*seed=*/0);
  load_checkpoint_into(path, m);
  return m;
}

}  // namespace corrmap::net
