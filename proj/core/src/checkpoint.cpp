#include "hieract/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "hieract/digest.hpp"
#include "hieract/error.hpp"
#include "json.hpp"

namespace hieract {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMagic = "HIERACT-CKPT 1";

void corrupt(const fs::path& path, const std::string& why) {
  fail(ErrorCategory::kCheckpoint, "corrupt checkpoint " + path.string() + ": " + why);
}

}  // namespace

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  fail(ErrorCategory::kCheckpoint, "checkpoint has no tensor " + name);
}

bool Checkpoint::has_tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

std::string digest_named_tensors(const std::map<std::string, const Tensor*>& tensors) {
  Sha256 h;
  for (const auto& [name, t] : tensors) {
    h.update(name).update_u64(t->rank());
    for (auto d : t->shape()) h.update_u64(static_cast<std::uint64_t>(d));
    h.update(t->values());
  }
  return h.hex_digest();
}

std::string Checkpoint::digest(const std::string& prefix) const {
  std::map<std::string, const Tensor*> selected;
  for (const auto& [n, t] : tensors)
    if (n.rfind(prefix, 0) == 0) selected.emplace(n, &t);
  return digest_named_tensors(selected);
}

void write_file_atomic(const fs::path& path, const std::string& data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    require(static_cast<bool>(out), ErrorCategory::kIo, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  json header;
  header["kind"] = ckpt.kind;
  header["metadata"] = json::parse(ckpt.metadata_json);
  json index = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    index.push_back({{"name", name},
                     {"shape", t.shape()},
                     {"offset", offset},
                     {"count", t.size()},
                     {"sha256", tensor_digest(name, t)}});
    offset += t.size() * sizeof(double);
  }
  header["tensors"] = std::move(index);
  header["digest"] = ckpt.digest();
  const std::string header_text = header.dump();

  std::string blob;
  blob.reserve(offset + header_text.size() + 64);
  blob += kMagic;
  blob += '\n';
  blob += std::to_string(header_text.size());
  blob += '\n';
  blob += header_text;
  for (const auto& [name, t] : ckpt.tensors)
    blob.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double));
  write_file_atomic(path, blob);
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::kCheckpoint, "missing checkpoint " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != kMagic) corrupt(path, "bad magic");
  std::string len_line;
  std::getline(in, len_line);
  std::size_t header_len = 0;
  try {
    header_len = std::stoull(len_line);
  } catch (const std::exception&) {
    corrupt(path, "bad header length");
  }
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (static_cast<std::size_t>(in.gcount()) != header_len) corrupt(path, "truncated header");
  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    corrupt(path, std::string("header is not valid JSON: ") + e.what());
  }
  const auto payload_start = in.tellg();

  Checkpoint ckpt;
  try {
    ckpt.kind = header.at("kind").get<std::string>();
    ckpt.metadata_json = header.at("metadata").dump();
    for (const auto& entry : header.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<Shape>();
      const auto count = entry.at("count").get<std::uint64_t>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      if (static_cast<std::uint64_t>(shape_numel(shape)) != count) corrupt(path, "shape/count mismatch for " + name);
      Tensor t(shape);
      in.seekg(payload_start + static_cast<std::streamoff>(offset));
      in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(count * sizeof(double)));
      if (static_cast<std::uint64_t>(in.gcount()) != count * sizeof(double)) corrupt(path, "truncated tensor " + name);
      if (tensor_digest(name, t) != entry.at("sha256").get<std::string>())
        fail(ErrorCategory::kCheckpoint,
             "digest mismatch in checkpoint " + path.string() + ": tensor " + name + " was altered");
      ckpt.tensors.emplace_back(name, std::move(t));
    }
    if (ckpt.digest() != header.at("digest").get<std::string>())
      fail(ErrorCategory::kCheckpoint, "digest mismatch in checkpoint " + path.string() + ": tensor set altered");
  } catch (const json::exception& e) {
    corrupt(path, std::string("malformed header: ") + e.what());
  }
  return ckpt;
}

void append_params(Checkpoint& ckpt, const ParamStore& store) {
  for (const auto& p : store.entries()) ckpt.tensors.emplace_back(p.name, p.value);
}

void load_params(const Checkpoint& ckpt, ParamStore& store) {
  for (auto& p : store.entries()) {
    const Tensor& t = ckpt.tensor(p.name);
    require(t.shape() == p.value.shape(), ErrorCategory::kCheckpoint,
            "checkpoint tensor " + p.name + " has shape " + shape_to_string(t.shape()) + ", expected " +
                shape_to_string(p.value.shape()));
    p.value = t;
  }
}

}  // namespace hieract
