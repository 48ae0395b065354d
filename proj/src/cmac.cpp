#include "cumac/cmac.hpp"

#include <cstring>

namespace cumac {

namespace {

// Doubling in GF(2^128) with the CMAC reduction polynomial.
void left_shift_xor(const std::uint8_t in[16], std::uint8_t out[16]) {
    std::uint8_t carry = 0;
    for (int i = 15; i >= 0; --i) {
        out[i] = static_cast<std::uint8_t>((in[i] << 1) | carry);
        carry = in[i] >> 7;
    }
    if (carry) {
        out[15] ^= 0x87;
    }
}

}  // namespace

CmacContext::CmacContext(std::span<const std::uint8_t, 16> key) : aes_(key) {
    std::uint8_t zero[16] = {0};
    std::uint8_t l[16];
    aes_.encrypt_block(zero, l);
    left_shift_xor(l, k1_.data());
    left_shift_xor(k1_.data(), k2_.data());
}

std::array<std::uint8_t, 16> CmacContext::mac(std::span<const std::uint8_t> message) const {
    std::size_t n_blocks = (message.size() + 15) / 16;
    bool complete = n_blocks > 0 && message.size() % 16 == 0;
    if (n_blocks == 0) {
        n_blocks = 1;
    }

    std::uint8_t x[16] = {0};
    std::uint8_t block[16];
    for (std::size_t i = 0; i + 1 < n_blocks; ++i) {
        for (int j = 0; j < 16; ++j) {
            block[j] = static_cast<std::uint8_t>(x[j] ^ message[16 * i + j]);
        }
        aes_.encrypt_block(block, x);
    }

    // Last block: XOR with K1 if complete, otherwise pad with 10...0 and K2.
    std::uint8_t last[16] = {0};
    std::size_t tail = message.size() - (n_blocks - 1) * 16;
    if (complete) {
        std::memcpy(last, message.data() + (n_blocks - 1) * 16, 16);
        for (int j = 0; j < 16; ++j) {
            last[j] ^= k1_[j];
        }
    } else {
        if (tail > 0 && !message.empty()) {
            std::memcpy(last, message.data() + (n_blocks - 1) * 16, tail);
        }
        last[message.empty() ? 0 : tail] = 0x80;
        for (int j = 0; j < 16; ++j) {
            last[j] ^= k2_[j];
        }
    }

    for (int j = 0; j < 16; ++j) {
        block[j] = static_cast<std::uint8_t>(x[j] ^ last[j]);
    }
    std::array<std::uint8_t, 16> out;
    aes_.encrypt_block(block, out.data());
    return out;
}

std::array<std::uint8_t, 16> aes_cmac(std::span<const std::uint8_t, 16> key,
                                      std::span<const std::uint8_t> message) {
    return CmacContext(key).mac(message);
}

}  // namespace cumac
