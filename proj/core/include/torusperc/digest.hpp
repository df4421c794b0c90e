#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace torusperc {

// FNV-1a 64-bit running digest. Used for kernel ids, sweep-order checksums and
// config digests; stability across runs on one platform is all that is needed.
class Digest {
 public:
  Digest& bytes(const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ull;
    }
    return *this;
  }
  Digest& u64(std::uint64_t v) { return bytes(&v, sizeof v); }
  Digest& i32(std::int32_t v) { return bytes(&v, sizeof v); }
  Digest& f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    return u64(bits);
  }
  Digest& f64s(const std::vector<double>& v) {
    for (double x : v) f64(x);
    return *this;
  }
  Digest& str(const std::string& s) { return bytes(s.data(), s.size()); }

  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

std::string hex_digest(std::uint64_t v);

}  // namespace torusperc
