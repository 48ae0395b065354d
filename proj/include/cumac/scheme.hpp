#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cumac/bitstring.hpp"
#include "cumac/mac.hpp"
#include "cumac/packet.hpp"
#include "cumac/speculation.hpp"

namespace cumac {

// The six authentication schemes share one MAC geometry (L bits, n segments
// of l bits) so their per-message tag bandwidth is comparable: the block and
// trailing schemes amortize a full L-bit MAC over several packets, while the
// truncated and cumulative schemes attach l bits to every message.
enum class SchemeKind {
    truncated,   // per-message tag = leading l bits of the full MAC
    trailing,    // untagged message, full MAC follows in extra packets
    compound,    // one full MAC over each block of n concatenated messages
    aggregate,   // XOR of the n per-message full MACs, sent with the block
    cumac,       // cumulative aggregation of one segment per in-flight MAC
    cumac_spec,  // cumulative aggregation plus message speculation
};

const char* scheme_name(SchemeKind kind);
SchemeKind scheme_from_name(const std::string& name);

struct SchemeParams {
    SchemeKind kind = SchemeKind::cumac;
    MacParams mac;
    MacAlgo algo = MacAlgo::aes_cmac;
    // Number of extra packets carrying the trailing MAC; must divide L.
    std::uint32_t trailing_split = 2;
    // Predictor for cumac_spec; both endpoints must configure it identically.
    std::optional<SpeculationConfig> speculation;

    void validate() const;
};

// How strongly a message is authenticated right now. A message is `full`
// whenever its verified bits reach L, no matter when that happened;
// `real_time` means it still holds only what arrived with its own packet,
// and `partially_accumulated` that later packets raised it above that but
// not yet to L.
enum class AuthLevel { none, real_time, partially_accumulated, full };
const char* auth_level_name(AuthLevel level);

struct AuthReport {
    std::uint32_t counter = 0;
    std::size_t bits = 0;             // verified strength right now
    std::size_t at_arrival_bits = 0;  // verified strength when it arrived
    AuthLevel level = AuthLevel::none;
};

enum class VerifyStatus {
    valid,     // authentication checked out
    invalid,   // checked and failed, or can no longer complete
    deferred,  // verdict needs more packets (block or trailing parts pending)
};
const char* verify_status_name(VerifyStatus status);

struct VerifyOutcome {
    std::uint32_t counter = 0;
    VerifyStatus status = VerifyStatus::deferred;
};

// Transmitting endpoint. send() consumes the next counter and emits the
// packets for one message (one packet for most schemes; the trailing scheme
// adds its tag packets). ack() reports the fate of the most recent send:
// rewinding schemes (truncated, cumac, cumac_spec) restore their pre-send
// state on a failed delivery, so the counter is reused and an identical
// send can be reproduced; block and trailing schemes treat emitted packets
// as committed and ignore the feedback.
class Sender {
public:
    virtual ~Sender() = default;
    virtual std::vector<Packet> send(const BitString& payload) = 0;
    virtual void ack(std::uint32_t counter, bool delivered) = 0;
    virtual std::uint32_t next_counter() const = 0;
    virtual const SchemeParams& params() const = 0;
};

// Receiving endpoint. deliver() consumes packets in channel order; message
// counters must be strictly increasing (a repeated counter raises
// ReplayError), and gaps are tolerated: a unit whose pieces never all arrive
// simply stays unauthenticated. auth_status() reports on any message seen so
// far and raises NotFoundError for counters never delivered.
class Receiver {
public:
    virtual ~Receiver() = default;
    virtual VerifyOutcome deliver(const Packet& packet) = 0;
    virtual AuthReport auth_status(std::uint32_t counter) const = 0;
    virtual std::uint32_t last_counter() const = 0;
    virtual const SchemeParams& params() const = 0;
};

std::unique_ptr<Sender> make_sender(const SchemeParams& params, const SecretKey& key);
std::unique_ptr<Receiver> make_receiver(const SchemeParams& params, const SecretKey& key);

// Verified bits for a message once its own packet and packets_seen - 1
// subsequent packets have arrived over a loss-free channel (packets_seen is
// at least 1 and counts the message's own packet). For the block schemes the
// message is taken to open a block, which is the canonical delay curve. For
// cumac_spec, speculation_correct selects the curve where the sender's
// prediction of this message matched.
std::size_t strength_after(const SchemeParams& params, std::size_t packets_seen,
                           bool speculation_correct = false);

// The staircase strength_after traces for packets_seen = 1..max_packets.
std::vector<std::size_t> strength_profile(const SchemeParams& params,
                                          std::size_t max_packets,
                                          bool speculation_correct = false);

// True for schemes whose packets are committed once emitted (block and
// trailing schemes advance their counters across losses); false for the
// rewinding schemes.
bool committed_units(SchemeKind kind);

// Fixed-width two's-complement payload encoding for integer samples,
// big-endian, 1..64 bits. payload_value sign-extends from the payload width.
BitString value_payload(std::int64_t value, std::size_t bits);
std::int64_t payload_value(const BitString& payload);

// Everything an endpoint derives while running a cumulative scheme over a
// message sequence with counters 1..N: per-counter tags, the real MACs, and
// (for cumac_spec) the predicted messages and speculated MACs, recorded at
// the moment they were formed. Index c-1 holds counter c; entries that were
// never formed are empty bit strings.
struct CumulativeTranscript {
    std::vector<BitString> tags;
    std::vector<BitString> sigma;
    std::vector<BitString> sigma_hat;
    std::vector<BitString> predicted;
};

CumulativeTranscript run_cumulative(const SchemeParams& params, const SecretKey& key,
                                    const std::vector<BitString>& payloads);

}  // namespace cumac
