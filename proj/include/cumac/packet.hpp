#pragma once

#include <cstdint>
#include <vector>

#include "cumac/bitstring.hpp"

namespace cumac {

// One transmitted unit: a counter, an optional payload, and a tag. Schemes
// that send standalone authentication units (e.g. a trailing full MAC) leave
// the payload empty and mark the packet accordingly; the flag is local
// bookkeeping and is not carried on the wire.
struct Packet {
    std::uint32_t counter = 0;
    BitString payload;
    BitString tag;
    bool trailing_tag = false;
};

// Wire format, all integers big-endian:
//   4 bytes  counter
//   2 bytes  payload length in bits
//   payload, zero-padded to a byte boundary
//   tag, zero-padded to a byte boundary
//
// The tag length is fixed by the scheme configuration, so it is not encoded;
// deserialization takes it as a parameter and consumes the remaining bytes.
std::vector<std::uint8_t> serialize(const Packet& packet);
Packet deserialize(const std::vector<std::uint8_t>& bytes, std::size_t tag_bits);

}  // namespace cumac
