#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace hieract {

/// Incremental SHA-256; hex-encoded lowercase output.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::byte> bytes);
  Sha256& update(std::string_view text);
  Sha256& update(std::span<const double> values);
  Sha256& update_u64(std::uint64_t value);
  std::string hex_digest();

 private:
  struct Impl;
  Impl* impl_;
};

std::string sha256_hex(std::string_view text);

}  // namespace hieract
