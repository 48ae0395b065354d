#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace cumac {

// AES-128, encrypt direction only (that is all CMAC needs). Key schedule
// is expanded once at construction so repeated block encryptions under the
// same key are cheap.
class Aes128 {
public:
    explicit Aes128(std::span<const std::uint8_t, 16> key);

    void encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const;

private:
    std::array<std::uint32_t, 44> round_keys_{};
};

}  // namespace cumac
