#include "cumac/bitstring.hpp"

#include <algorithm>

#include "cumac/errors.hpp"

namespace cumac {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

BitString::BitString(std::size_t bits) : bytes_((bits + 7) / 8, 0), bits_(bits) {}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes, std::size_t bits) {
    if (bits > bytes.size() * 8) {
        throw FormatError("bit length exceeds provided bytes");
    }
    BitString out;
    out.bits_ = bits;
    out.bytes_.assign(bytes.begin(), bytes.begin() + static_cast<long>((bits + 7) / 8));
    out.clear_slack();
    return out;
}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes) {
    return from_bytes(bytes, bytes.size() * 8);
}

BitString BitString::from_hex(const std::string& hex) {
    BitString out;
    out.bits_ = hex.size() * 4;
    out.bytes_.assign((hex.size() + 1) / 2, 0);
    for (std::size_t i = 0; i < hex.size(); ++i) {
        int v = hex_value(hex[i]);
        if (v < 0) {
            throw FormatError("invalid hex digit in \"" + hex + "\"");
        }
        if (i % 2 == 0) {
            out.bytes_[i / 2] |= static_cast<std::uint8_t>(v << 4);
        } else {
            out.bytes_[i / 2] |= static_cast<std::uint8_t>(v);
        }
    }
    return out;
}

BitString BitString::random(std::size_t bits, std::mt19937_64& rng) {
    BitString out(bits);
    for (auto& b : out.bytes_) {
        b = static_cast<std::uint8_t>(rng() & 0xff);
    }
    out.clear_slack();
    return out;
}

bool BitString::bit(std::size_t index) const {
    if (index >= bits_) {
        throw FormatError("bit index out of range");
    }
    return (bytes_[index / 8] >> (7 - index % 8)) & 1;
}

void BitString::set_bit(std::size_t index, bool value) {
    if (index >= bits_) {
        throw FormatError("bit index out of range");
    }
    std::uint8_t mask = static_cast<std::uint8_t>(1u << (7 - index % 8));
    if (value) {
        bytes_[index / 8] |= mask;
    } else {
        bytes_[index / 8] &= static_cast<std::uint8_t>(~mask);
    }
}

void BitString::flip_bit(std::size_t index) { set_bit(index, !bit(index)); }

BitString BitString::slice(std::size_t start, std::size_t length) const {
    if (start + length > bits_) {
        throw FormatError("slice out of range");
    }
    BitString out(length);
    if (start % 8 == 0) {
        // Fast path: byte-aligned copy, then trim.
        std::copy_n(bytes_.begin() + static_cast<long>(start / 8),
                    (length + 7) / 8, out.bytes_.begin());
        out.clear_slack();
    } else {
        for (std::size_t i = 0; i < length; ++i) {
            out.set_bit(i, bit(start + i));
        }
    }
    return out;
}

void BitString::append(const BitString& other) {
    if (bits_ % 8 == 0) {
        bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
        bits_ += other.bits_;
        return;
    }
    std::size_t old_bits = bits_;
    bits_ += other.bits_;
    bytes_.resize((bits_ + 7) / 8, 0);
    for (std::size_t i = 0; i < other.bits_; ++i) {
        set_bit(old_bits + i, other.bit(i));
    }
}

BitString& BitString::operator^=(const BitString& other) {
    if (bits_ != other.bits_) {
        throw FormatError("xor of bit strings with different lengths");
    }
    for (std::size_t i = 0; i < bytes_.size(); ++i) {
        bytes_[i] ^= other.bytes_[i];
    }
    return *this;
}

std::string BitString::to_hex() const {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes_.size() * 2);
    for (std::uint8_t b : bytes_) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    // A length that is not a multiple of 8 still renders whole bytes; the
    // slack bits are guaranteed zero.
    return out;
}

std::uint64_t BitString::to_uint64() const {
    if (bits_ > 64) {
        throw FormatError("bit string too long for uint64");
    }
    std::uint64_t v = 0;
    for (std::uint8_t b : bytes_) {
        v = (v << 8) | b;
    }
    // Right-align: the value is the big-endian reading of the bits.
    std::size_t slack = bytes_.size() * 8 - bits_;
    return v >> slack;
}

void BitString::clear_slack() {
    if (bits_ % 8 != 0 && !bytes_.empty()) {
        std::uint8_t keep = static_cast<std::uint8_t>(0xff00 >> (bits_ % 8));
        bytes_.back() &= keep;
    }
}

}  // namespace cumac
