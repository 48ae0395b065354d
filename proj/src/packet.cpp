#include "cumac/packet.hpp"

#include "cumac/errors.hpp"

namespace cumac {

std::vector<std::uint8_t> serialize(const Packet& packet) {
    if (packet.payload.size_bits() > 0xffff) {
        throw FormatError("payload too long for the 16-bit length field");
    }
    std::vector<std::uint8_t> out;
    out.reserve(6 + packet.payload.size_bytes() + packet.tag.size_bytes());
    out.push_back(static_cast<std::uint8_t>(packet.counter >> 24));
    out.push_back(static_cast<std::uint8_t>(packet.counter >> 16));
    out.push_back(static_cast<std::uint8_t>(packet.counter >> 8));
    out.push_back(static_cast<std::uint8_t>(packet.counter));
    std::uint16_t bits = static_cast<std::uint16_t>(packet.payload.size_bits());
    out.push_back(static_cast<std::uint8_t>(bits >> 8));
    out.push_back(static_cast<std::uint8_t>(bits));
    auto payload = packet.payload.bytes();
    out.insert(out.end(), payload.begin(), payload.end());
    auto tag = packet.tag.bytes();
    out.insert(out.end(), tag.begin(), tag.end());
    return out;
}

Packet deserialize(const std::vector<std::uint8_t>& bytes, std::size_t tag_bits) {
    if (bytes.size() < 6) {
        throw FormatError("packet shorter than its fixed header");
    }
    Packet p;
    p.counter = (static_cast<std::uint32_t>(bytes[0]) << 24) |
                (static_cast<std::uint32_t>(bytes[1]) << 16) |
                (static_cast<std::uint32_t>(bytes[2]) << 8) |
                static_cast<std::uint32_t>(bytes[3]);
    std::size_t payload_bits = (static_cast<std::size_t>(bytes[4]) << 8) | bytes[5];
    std::size_t payload_bytes = (payload_bits + 7) / 8;
    std::size_t tag_bytes = (tag_bits + 7) / 8;
    if (bytes.size() != 6 + payload_bytes + tag_bytes) {
        throw FormatError("packet length does not match its declared contents");
    }
    p.payload = BitString::from_bytes(
        std::span<const std::uint8_t>(bytes.data() + 6, payload_bytes), payload_bits);
    p.tag = BitString::from_bytes(
        std::span<const std::uint8_t>(bytes.data() + 6 + payload_bytes, tag_bytes),
        tag_bits);
    p.trailing_tag = payload_bits == 0;
    return p;
}

}  // namespace cumac
