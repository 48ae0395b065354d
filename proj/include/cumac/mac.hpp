#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cumac/bitstring.hpp"

namespace cumac {

// Geometry of a segmented MAC: a total_bits-bit output carved into
// segment_count segments of segment_bits each.
struct MacParams {
    std::uint32_t total_bits = 128;    // L
    std::uint32_t segment_count = 8;   // n
    std::uint32_t segment_bits = 16;   // l

    // Throws ConfigError unless total_bits == segment_count * segment_bits,
    // every field is positive, and total_bits fits in one AES-CMAC output.
    void validate() const;
};

struct SecretKey {
    std::vector<std::uint8_t> bytes;
    std::uint32_t lambda_bits = 0;
};

// Fresh key of lambda_bits (must be a positive multiple of 8). A seed makes
// the key reproducible; without one the key is drawn from the OS entropy
// source.
SecretKey key_gen(std::uint32_t lambda_bits,
                  std::optional<std::uint64_t> seed = std::nullopt);

enum class MacAlgo {
    aes_cmac,  // full-width AES-CMAC; requires a 128-bit key and L == 128
    toy,       // AES-CMAC truncated to a small L so forgery rates are measurable
};

// MAC of (counter, message): AES-CMAC over the 32-bit big-endian counter
// prepended to the message bytes, windowed to the first L bits. The same
// message under different counters yields unrelated outputs.
BitString mac_gen(const SecretKey& key, MacAlgo algo, std::uint32_t counter,
                  std::span<const std::uint8_t> message, const MacParams& params);

// Raw CMAC context carrying the per-key state; use when many mac_gen calls
// share one key (schemes, simulations, experiments).
class MacContext {
public:
    MacContext(const SecretKey& key, MacAlgo algo, const MacParams& params);

    BitString mac(std::uint32_t counter, std::span<const std::uint8_t> message) const;

    const MacParams& params() const { return params_; }
    MacAlgo algo() const { return algo_; }

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    MacParams params_;
    MacAlgo algo_;
};

// Splits an L-bit MAC into n segments of l bits; segment j (1-based) covers
// bits (j-1)*l .. j*l-1 counted MSB-first, so concatenating the segments in
// order reproduces the MAC.
std::vector<BitString> segment_mac(const BitString& mac, const MacParams& params);

// XOR of equal-length bit strings. Rejects an empty list and mixed lengths.
BitString xor_aggregate(std::span<const BitString> parts);

}  // namespace cumac
