#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cumac/aes.hpp"

namespace cumac {

// AES-CMAC (RFC 4493). Subkeys K1/K2 are derived once so that many short
// messages can be authenticated under the same key without re-deriving.
class CmacContext {
public:
    explicit CmacContext(std::span<const std::uint8_t, 16> key);

    std::array<std::uint8_t, 16> mac(std::span<const std::uint8_t> message) const;

private:
    Aes128 aes_;
    std::array<std::uint8_t, 16> k1_{};
    std::array<std::uint8_t, 16> k2_{};
};

// One-shot convenience wrapper.
std::array<std::uint8_t, 16> aes_cmac(std::span<const std::uint8_t, 16> key,
                                      std::span<const std::uint8_t> message);

}  // namespace cumac
