// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace lutnn {

// FNV-1a, 64-bit. Stable across platforms; used to fingerprint configs,
// datasets, truth tables and checkpoints so manifests can chain stages.
class Fnv1a {
 public:
  void update(const void* data, size_t n) {
    const auto* p = static_cast<const uint8_t*>(data);
    for (size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ull;
    }
  }
  void update(const std::string& s) { update(s.data(), s.size()); }
  template <typename T>
  void update_pod(const T& v) {
    update(&v, sizeof(T));
  }
  uint64_t value() const { return state_; }

 private:
  uint64_t state_ = 0xcbf29ce484222325ull;
};

uint64_t fnv1a(const void* data, size_t n);
uint64_t fnv1a(const std::string& s);
std::string digest_hex(uint64_t d);

}  // namespace lutnn
