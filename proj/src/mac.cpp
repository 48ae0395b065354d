#include "cumac/mac.hpp"

#include <memory>
#include <random>

#include "cumac/cmac.hpp"
#include "cumac/errors.hpp"

namespace cumac {

void MacParams::validate() const {
    if (total_bits == 0 || segment_count == 0 || segment_bits == 0) {
        throw ConfigError("MAC geometry fields must be positive");
    }
    if (total_bits != segment_count * segment_bits) {
        throw ConfigError("total_bits must equal segment_count * segment_bits");
    }
    if (total_bits > 128) {
        throw ConfigError("total_bits larger than one AES-CMAC output");
    }
}

SecretKey key_gen(std::uint32_t lambda_bits, std::optional<std::uint64_t> seed) {
    if (lambda_bits == 0 || lambda_bits % 8 != 0) {
        throw ConfigError("key length must be a positive multiple of 8 bits");
    }
    SecretKey key;
    key.lambda_bits = lambda_bits;
    key.bytes.resize(lambda_bits / 8);
    std::mt19937_64 rng;
    if (seed) {
        rng.seed(*seed);
    } else {
        std::random_device rd;
        rng.seed((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
    }
    for (auto& b : key.bytes) {
        b = static_cast<std::uint8_t>(rng() & 0xff);
    }
    return key;
}

namespace {

// Both algorithms run AES-CMAC underneath; the toy variant accepts short
// keys by padding (or truncating) them to the AES-128 key size.
std::array<std::uint8_t, 16> aes_key_bytes(const SecretKey& key, MacAlgo algo) {
    if (algo == MacAlgo::aes_cmac && key.lambda_bits != 128) {
        throw ConfigError("aes_cmac mode requires a 128-bit key");
    }
    if (key.bytes.empty()) {
        throw ConfigError("empty key");
    }
    std::array<std::uint8_t, 16> out{};
    for (std::size_t i = 0; i < out.size() && i < key.bytes.size(); ++i) {
        out[i] = key.bytes[i];
    }
    return out;
}

}  // namespace

struct MacContext::Impl {
    explicit Impl(const std::array<std::uint8_t, 16>& key_bytes) : cmac(key_bytes) {}
    CmacContext cmac;
};

MacContext::MacContext(const SecretKey& key, MacAlgo algo, const MacParams& params)
    : params_(params), algo_(algo) {
    params.validate();
    if (algo == MacAlgo::aes_cmac && params.total_bits != 128) {
        throw ConfigError("aes_cmac mode produces 128-bit MACs");
    }
    impl_ = std::make_shared<const Impl>(aes_key_bytes(key, algo));
}

BitString MacContext::mac(std::uint32_t counter,
                          std::span<const std::uint8_t> message) const {
    // Counter binding: fixed-width 32-bit big-endian prefix, so message bytes
    // can never be confused with counter bytes.
    std::vector<std::uint8_t> framed;
    framed.reserve(4 + message.size());
    framed.push_back(static_cast<std::uint8_t>(counter >> 24));
    framed.push_back(static_cast<std::uint8_t>(counter >> 16));
    framed.push_back(static_cast<std::uint8_t>(counter >> 8));
    framed.push_back(static_cast<std::uint8_t>(counter));
    framed.insert(framed.end(), message.begin(), message.end());
    auto full = impl_->cmac.mac(framed);
    return BitString::from_bytes(full, params_.total_bits);
}

BitString mac_gen(const SecretKey& key, MacAlgo algo, std::uint32_t counter,
                  std::span<const std::uint8_t> message, const MacParams& params) {
    return MacContext(key, algo, params).mac(counter, message);
}

std::vector<BitString> segment_mac(const BitString& mac, const MacParams& params) {
    params.validate();
    if (mac.size_bits() != params.total_bits) {
        throw ConfigError("MAC length does not match parameters");
    }
    std::vector<BitString> segments;
    segments.reserve(params.segment_count);
    for (std::uint32_t j = 0; j < params.segment_count; ++j) {
        segments.push_back(mac.slice(j * params.segment_bits, params.segment_bits));
    }
    return segments;
}

BitString xor_aggregate(std::span<const BitString> parts) {
    if (parts.empty()) {
        throw ConfigError("xor_aggregate needs at least one input");
    }
    BitString acc = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) {
        acc ^= parts[i];  // throws FormatError on mixed lengths
    }
    return acc;
}

}  // namespace cumac
