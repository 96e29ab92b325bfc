// SPDX-License-Identifier: Apache-2.0
#include "lutnn/digest.hpp"

#include <cstdio>

namespace lutnn {

uint64_t fnv1a(const void* data, size_t n) {
  Fnv1a h;
  h.update(data, n);
  return h.value();
}

uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

std::string digest_hex(uint64_t d) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(d));
  return buf;
}

}  // namespace lutnn
