#pragma once

#include <cstdint>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cumac {

// Fixed-length bit string with MSB-first addressing: bit 0 is the most
// significant bit of the first byte, so "the first k bits" of a MAC are
// the high-order bits of its leading bytes. Unused trailing bits of the
// last byte are kept zero, which makes equality a plain byte comparison.
class BitString {
public:
    BitString() = default;

    // All-zero string of the given length.
    explicit BitString(std::size_t bits);

    static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t bits);
    static BitString from_bytes(std::span<const std::uint8_t> bytes);

    // Parses big-endian hex; the result has 4 bits per hex digit.
    static BitString from_hex(const std::string& hex);

    // Uniformly random string of the given length.
    static BitString random(std::size_t bits, std::mt19937_64& rng);

    std::size_t size_bits() const { return bits_; }
    std::size_t size_bytes() const { return bytes_.size(); }
    bool empty() const { return bits_ == 0; }

    bool bit(std::size_t index) const;
    void set_bit(std::size_t index, bool value);
    void flip_bit(std::size_t index);

    // Extracts [start, start + length) as a new string.
    BitString slice(std::size_t start, std::size_t length) const;

    // Appends the other string after this one's last bit.
    void append(const BitString& other);

    BitString& operator^=(const BitString& other);  // lengths must match
    friend BitString operator^(BitString lhs, const BitString& rhs) {
        lhs ^= rhs;
        return lhs;
    }

    bool operator==(const BitString& other) const = default;

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::string to_hex() const;

    // Value of the whole string read as a big-endian integer; length must
    // be at most 64 bits.
    std::uint64_t to_uint64() const;

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t bits_ = 0;

    void clear_slack();
};

}  // namespace cumac
