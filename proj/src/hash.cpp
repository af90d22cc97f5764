#include "evochain/hash.hpp"

#include <array>
#include <stdexcept>

#include <openssl/evp.h>

namespace evochain {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("sha-256 digest failed");
  }
  static constexpr char hexdig[] = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(len) * 2, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = hexdig[digest[i] >> 4];
    out[2 * i + 1] = hexdig[digest[i] & 0x0f];
  }
  return out;
}

}  // namespace evochain
