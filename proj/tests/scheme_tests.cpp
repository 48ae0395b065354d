#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"

#include "cumac/bitstring.hpp"
#include "cumac/errors.hpp"
#include "cumac/mac.hpp"
#include "cumac/packet.hpp"
#include "cumac/scheme.hpp"
#include "cumac/speculation.hpp"

using namespace cumac;

namespace {

SchemeParams make_params(SchemeKind kind, std::uint32_t L = 128, std::uint32_t n = 4) {
    SchemeParams p;
    p.kind = kind;
    p.mac = MacParams{L, n, L / n};
    p.algo = MacAlgo::aes_cmac;
    if (kind == SchemeKind::cumac_spec) {
        p.speculation = persistence_config();
    }
    return p;
}

const SecretKey& test_key() {
    static SecretKey key = key_gen(128, 7);
    return key;
}

// Segment j (1-based) of an L-bit MAC.
BitString seg(const BitString& sigma, std::uint32_t j, std::uint32_t l) {
    return sigma.slice((j - 1) * l, l);
}

BitString sigma_of(const SchemeParams& p, std::uint32_t counter, const BitString& payload) {
    return mac_gen(test_key(), p.algo, counter, payload.bytes(), p.mac);
}

std::vector<BitString> numbered_payloads(std::size_t count, std::int64_t stride = 1000) {
    std::vector<BitString> out;
    for (std::size_t i = 1; i <= count; ++i) {
        out.push_back(value_payload(static_cast<std::int64_t>(i) * stride + 7, 32));
    }
    return out;
}

}  // namespace

TEST_CASE("scheme names round trip and committed schemes are classified") {
    for (SchemeKind kind :
         {SchemeKind::truncated, SchemeKind::trailing, SchemeKind::compound,
          SchemeKind::aggregate, SchemeKind::cumac, SchemeKind::cumac_spec}) {
        CHECK(scheme_from_name(scheme_name(kind)) == kind);
    }
    CHECK_THROWS_AS(scheme_from_name("md5"), ConfigError);
    CHECK(committed_units(SchemeKind::trailing));
    CHECK(committed_units(SchemeKind::compound));
    CHECK(committed_units(SchemeKind::aggregate));
    CHECK_FALSE(committed_units(SchemeKind::truncated));
    CHECK_FALSE(committed_units(SchemeKind::cumac));
    CHECK_FALSE(committed_units(SchemeKind::cumac_spec));
}

TEST_CASE("scheme parameters are validated") {
    SchemeParams p = make_params(SchemeKind::trailing);
    p.trailing_split = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.trailing_split = 3;  // does not divide 128
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.trailing_split = 4;
    CHECK_NOTHROW(p.validate());

    SchemeParams s = make_params(SchemeKind::cumac_spec);
    s.speculation.reset();
    CHECK_THROWS_AS(s.validate(), ConfigError);

    SchemeParams bad = make_params(SchemeKind::cumac);
    bad.mac.segment_bits = 31;  // 4 * 31 != 128
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("value payloads round trip two's complement integers") {
    for (std::size_t bits : {std::size_t{1}, std::size_t{2}, std::size_t{3},
                             std::size_t{8}, std::size_t{16}, std::size_t{33},
                             std::size_t{64}}) {
        std::int64_t lo = bits == 64 ? INT64_MIN
                                     : -(std::int64_t{1} << (bits - 1));
        std::int64_t hi = bits == 64 ? INT64_MAX
                                     : (std::int64_t{1} << (bits - 1)) - 1;
        for (std::int64_t v : {lo, hi, std::int64_t{0}}) {
            BitString p = value_payload(v, bits);
            CHECK(p.size_bits() == bits);
            CHECK(payload_value(p) == v);
        }
    }
    CHECK(payload_value(value_payload(-1, 8)) == -1);
    CHECK(value_payload(-1, 8).to_hex() == "ff");
    CHECK(payload_value(value_payload(-3, 3)) == -3);
    CHECK_THROWS_AS(value_payload(0, 0), ConfigError);
    CHECK_THROWS_AS(value_payload(0, 65), ConfigError);
    CHECK_THROWS_AS(payload_value(BitString()), ConfigError);
}

TEST_CASE("the first cumulative tag is the first segment of the first mac") {
    SchemeParams p = make_params(SchemeKind::cumac);
    auto payloads = numbered_payloads(1);
    auto t = run_cumulative(p, test_key(), payloads);
    REQUIRE(t.tags.size() == 1);
    CHECK(t.tags[0] == seg(sigma_of(p, 1, payloads[0]), 1, 32));
}

TEST_CASE("a cumulative tag aggregates one segment per mac in flight") {
    SchemeParams p = make_params(SchemeKind::cumac);  // L=128, n=4, l=32
    auto payloads = numbered_payloads(5);
    auto t = run_cumulative(p, test_key(), payloads);
    REQUIRE(t.tags.size() == 5);

    // Recompute every MAC independently.
    std::vector<BitString> sigma;
    for (std::uint32_t c = 1; c <= 5; ++c) {
        sigma.push_back(sigma_of(p, c, payloads[c - 1]));
        CHECK(t.sigma[c - 1] == sigma.back());
    }

    // Early tags cover only the rows that exist yet.
    CHECK(t.tags[1] == (seg(sigma[1], 1, 32) ^ seg(sigma[0], 2, 32)));
    // In steady state the tag blends one segment from each of the last n MACs.
    BitString tau5 = seg(sigma[4], 1, 32);
    tau5 ^= seg(sigma[3], 2, 32);
    tau5 ^= seg(sigma[2], 3, 32);
    tau5 ^= seg(sigma[1], 4, 32);
    CHECK(t.tags[4] == tau5);
}

TEST_CASE("a speculative tag also carries segments of predicted future macs") {
    SchemeParams p = make_params(SchemeKind::cumac_spec);
    BitString constant = value_payload(42, 32);
    std::vector<BitString> payloads(8, constant);
    auto t = run_cumulative(p, test_key(), payloads);
    REQUIRE(t.tags.size() == 8);

    // With a constant series and the persistence model every prediction is
    // right, so the speculated MACs equal the real MACs of later counters.
    BitString tau5 = seg(sigma_of(p, 5, constant), 1, 32);
    tau5 ^= seg(sigma_of(p, 4, constant), 2, 32);
    tau5 ^= seg(sigma_of(p, 3, constant), 3, 32);
    tau5 ^= seg(sigma_of(p, 2, constant), 4, 32);
    tau5 ^= seg(sigma_of(p, 6, constant), 2, 32);
    tau5 ^= seg(sigma_of(p, 7, constant), 3, 32);
    tau5 ^= seg(sigma_of(p, 8, constant), 4, 32);
    CHECK(t.tags[4] == tau5);

    for (std::uint32_t c = 2; c <= 8; ++c) {
        CHECK(t.predicted[c - 1] == constant);
        CHECK(t.sigma_hat[c - 1] == t.sigma[c - 1]);  // hits reuse the row
    }
}

TEST_CASE("sender packets carry the transcript tags") {
    for (SchemeKind kind : {SchemeKind::cumac, SchemeKind::cumac_spec}) {
        SchemeParams p = make_params(kind);
        BitString constant = value_payload(-17, 16);
        std::vector<BitString> payloads(6, constant);
        auto transcript = run_cumulative(p, test_key(), payloads);

        auto sender = make_sender(p, test_key());
        for (std::size_t i = 0; i < payloads.size(); ++i) {
            auto packets = sender->send(payloads[i]);
            REQUIRE(packets.size() == 1);
            CHECK(packets[0].counter == i + 1);
            CHECK(packets[0].payload == payloads[i]);
            CHECK(packets[0].tag == transcript.tags[i]);
            sender->ack(packets[0].counter, true);
        }
    }
}

TEST_CASE("authentication strength follows the published delay curves") {
    SchemeParams base = make_params(SchemeKind::truncated, 128, 8);  // l = 16
    for (std::size_t r : {std::size_t{1}, std::size_t{4}, std::size_t{100}}) {
        CHECK(strength_after(base, r) == 16);
    }

    SchemeParams trail = make_params(SchemeKind::trailing, 128, 8);
    trail.trailing_split = 2;
    CHECK(strength_after(trail, 1) == 0);
    CHECK(strength_after(trail, 2) == 0);
    CHECK(strength_after(trail, 3) == 128);

    for (SchemeKind kind : {SchemeKind::compound, SchemeKind::aggregate}) {
        SchemeParams block = make_params(kind, 128, 8);
        CHECK(strength_after(block, 7) == 0);
        CHECK(strength_after(block, 8) == 128);
        CHECK(strength_after(block, 9) == 128);
    }

    SchemeParams cu = make_params(SchemeKind::cumac, 128, 8);
    CHECK(strength_after(cu, 1) == 16);
    CHECK(strength_after(cu, 3) == 48);
    CHECK(strength_after(cu, 8) == 128);
    CHECK(strength_after(cu, 12) == 128);
    CHECK(strength_profile(cu, 10) ==
          std::vector<std::size_t>{16, 32, 48, 64, 80, 96, 112, 128, 128, 128});

    SchemeParams spec = make_params(SchemeKind::cumac_spec, 128, 8);
    CHECK(strength_after(spec, 1, true) == 128);
    CHECK(strength_after(spec, 1, false) == 16);
    CHECK(strength_after(spec, 5, false) == 80);

    CHECK_THROWS_AS(strength_after(cu, 0), ConfigError);
}

TEST_CASE("every scheme authenticates a loss free stream") {
    const std::uint32_t n = 4;
    const std::size_t count = 3 * n + 2;
    for (SchemeKind kind :
         {SchemeKind::truncated, SchemeKind::trailing, SchemeKind::compound,
          SchemeKind::aggregate, SchemeKind::cumac, SchemeKind::cumac_spec}) {
        SchemeParams p = make_params(kind, 128, n);
        auto sender = make_sender(p, test_key());
        auto receiver = make_receiver(p, test_key());

        // Constant samples so speculation hits; the others do not care.
        BitString payload = value_payload(99, 32);
        std::size_t valid = 0, invalid = 0;
        for (std::size_t i = 0; i < count; ++i) {
            auto packets = sender->send(payload);
            for (const auto& packet : packets) {
                auto outcome = receiver->deliver(packet);
                if (outcome.status == VerifyStatus::valid) ++valid;
                if (outcome.status == VerifyStatus::invalid) ++invalid;
            }
            sender->ack(packets[0].counter, true);
        }
        CHECK(invalid == 0);
        CHECK(valid > 0);

        // The first message must reach its scheme's cap.
        std::uint32_t first = 1;
        AuthReport report = receiver->auth_status(first);
        if (kind == SchemeKind::truncated) {
            CHECK(report.bits == 32);
            CHECK(report.level == AuthLevel::real_time);
        } else {
            CHECK(report.bits == 128);
            CHECK(report.level == AuthLevel::full);
        }
    }
}

TEST_CASE("cumulative strength rises one segment per covering tag") {
    SchemeParams p = make_params(SchemeKind::cumac);  // n=4, l=32
    auto sender = make_sender(p, test_key());
    auto receiver = make_receiver(p, test_key());
    auto payloads = numbered_payloads(8);

    std::size_t delivered = 0;
    for (const auto& payload : payloads) {
        auto packets = sender->send(payload);
        receiver->deliver(packets[0]);
        sender->ack(packets[0].counter, true);
        ++delivered;

        AuthReport first = receiver->auth_status(1);
        CHECK(first.bits == std::min<std::size_t>(delivered, 4) * 32);
        CHECK(first.at_arrival_bits == 32);
        if (delivered == 1) CHECK(first.level == AuthLevel::real_time);
        if (delivered == 2) CHECK(first.level == AuthLevel::partially_accumulated);
        if (delivered >= 4) CHECK(first.level == AuthLevel::full);
    }
}

TEST_CASE("correct speculation yields full strength on arrival") {
    SchemeParams p = make_params(SchemeKind::cumac_spec);  // n=4, l=32
    auto sender = make_sender(p, test_key());
    auto receiver = make_receiver(p, test_key());
    BitString constant = value_payload(-7, 16);

    for (std::uint32_t c = 1; c <= 6; ++c) {
        auto packets = sender->send(constant);
        auto outcome = receiver->deliver(packets[0]);
        CHECK(outcome.status == VerifyStatus::valid);
        sender->ack(c, true);
    }
    // Message 6 arrived with its four preceding tags already verified, so the
    // speculated segments they carried were credited immediately.
    AuthReport sixth = receiver->auth_status(6);
    CHECK(sixth.bits == 128);
    CHECK(sixth.at_arrival_bits == 128);
    CHECK(sixth.level == AuthLevel::full);
}

TEST_CASE("always wrong speculation degrades to the plain cumulative scheme") {
    SchemeParams plain = make_params(SchemeKind::cumac);
    SchemeParams spec = make_params(SchemeKind::cumac_spec);
    auto payloads = numbered_payloads(10, 313);  // distinct, so persistence misses

    auto plain_sender = make_sender(plain, test_key());
    auto plain_receiver = make_receiver(plain, test_key());
    auto spec_sender = make_sender(spec, test_key());
    auto spec_receiver = make_receiver(spec, test_key());

    for (std::size_t i = 0; i < payloads.size(); ++i) {
        auto pp = plain_sender->send(payloads[i]);
        auto sp = spec_sender->send(payloads[i]);
        auto plain_outcome = plain_receiver->deliver(pp[0]);
        auto spec_outcome = spec_receiver->deliver(sp[0]);
        CHECK(plain_outcome.status == spec_outcome.status);
        CHECK(spec_outcome.status == VerifyStatus::valid);
        plain_sender->ack(pp[0].counter, true);
        spec_sender->ack(sp[0].counter, true);
    }
    for (std::uint32_t c = 1; c <= payloads.size(); ++c) {
        AuthReport a = plain_receiver->auth_status(c);
        AuthReport b = spec_receiver->auth_status(c);
        CHECK(a.bits == b.bits);
        CHECK(a.at_arrival_bits == b.at_arrival_bits);
        CHECK(a.level == b.level);
    }
}

TEST_CASE("rewinding schemes resynchronize across any drop pattern") {
    const bool pattern[12] = {true, true,  false, false, true, true,
                              true, false, true,  true,  true, true};
    for (SchemeKind kind :
         {SchemeKind::truncated, SchemeKind::cumac, SchemeKind::cumac_spec}) {
        SchemeParams p = make_params(kind);
        auto payloads = numbered_payloads(12, 77);

        auto lossy_sender = make_sender(p, test_key());
        std::vector<Packet> survivors;
        std::vector<BitString> surviving_payloads;
        for (std::size_t i = 0; i < payloads.size(); ++i) {
            auto packets = lossy_sender->send(payloads[i]);
            lossy_sender->ack(packets[0].counter, pattern[i]);
            if (pattern[i]) {
                survivors.push_back(packets[0]);
                surviving_payloads.push_back(payloads[i]);
            }
        }

        // A fresh sender fed only the surviving messages emits byte-identical
        // packets: dropped sends left no trace.
        auto clean_sender = make_sender(p, test_key());
        REQUIRE(survivors.size() == surviving_payloads.size());
        for (std::size_t i = 0; i < surviving_payloads.size(); ++i) {
            auto packets = clean_sender->send(surviving_payloads[i]);
            CHECK(serialize(packets[0]) == serialize(survivors[i]));
            clean_sender->ack(packets[0].counter, true);
        }

        // And the receiver accepts the surviving stream end to end.
        auto receiver = make_receiver(p, test_key());
        for (const auto& packet : survivors) {
            CHECK(receiver->deliver(packet).status == VerifyStatus::valid);
        }
    }
}

TEST_CASE("a corrupted tag invalidates only its own delivery") {
    SchemeParams p = make_params(SchemeKind::cumac);  // n=4, l=32
    auto sender = make_sender(p, test_key());
    auto receiver = make_receiver(p, test_key());
    auto payloads = numbered_payloads(12);

    for (std::size_t i = 0; i < payloads.size(); ++i) {
        auto packets = sender->send(payloads[i]);
        Packet delivered = packets[0];
        if (delivered.counter == 5) {
            // Flipping any single bit works; use the first.
            delivered.tag = delivered.tag ^ BitString::from_hex("80000000");
        }
        auto outcome = receiver->deliver(delivered);
        if (delivered.counter == 5) {
            CHECK(outcome.status == VerifyStatus::invalid);
        } else {
            CHECK(outcome.status == VerifyStatus::valid);
        }
        sender->ack(packets[0].counter, true);
    }

    // The corrupted tag vouched for nothing: message 5 misses its own
    // segment, and messages 2..4 each miss the one segment tag 5 carried.
    CHECK(receiver->auth_status(1).bits == 128);
    CHECK(receiver->auth_status(2).bits == 96);
    CHECK(receiver->auth_status(3).bits == 96);
    CHECK(receiver->auth_status(4).bits == 96);
    AuthReport fifth = receiver->auth_status(5);
    CHECK(fifth.bits == 96);
    CHECK(fifth.at_arrival_bits == 0);
    CHECK(fifth.level == AuthLevel::partially_accumulated);
    for (std::uint32_t c = 6; c <= 9; ++c) {
        CHECK(receiver->auth_status(c).bits == 128);
    }
}

TEST_CASE("a corrupted message invalidates a window of tags and heals") {
    SchemeParams p = make_params(SchemeKind::cumac);  // n=4, l=32
    auto sender = make_sender(p, test_key());
    auto receiver = make_receiver(p, test_key());
    auto payloads = numbered_payloads(12);

    std::vector<VerifyStatus> statuses;
    for (std::size_t i = 0; i < payloads.size(); ++i) {
        auto packets = sender->send(payloads[i]);
        Packet delivered = packets[0];
        if (delivered.counter == 5) {
            delivered.payload = delivered.payload ^ value_payload(1, 32);
        }
        statuses.push_back(receiver->deliver(delivered).status);
        sender->ack(packets[0].counter, true);
    }

    // The forged message poisons every tag that blends a segment of its MAC:
    // its own and the next n-1, after which the stream heals on its own.
    for (std::uint32_t c = 1; c <= 12; ++c) {
        bool poisoned = c >= 5 && c <= 8;
        CHECK(statuses[c - 1] ==
              (poisoned ? VerifyStatus::invalid : VerifyStatus::valid));
    }

    // Strength climbs back one segment per healed tag.
    CHECK(receiver->auth_status(5).bits == 0);
    CHECK(receiver->auth_status(5).level == AuthLevel::none);
    CHECK(receiver->auth_status(6).bits == 32);
    CHECK(receiver->auth_status(7).bits == 64);
    CHECK(receiver->auth_status(8).bits == 96);
    CHECK(receiver->auth_status(8).at_arrival_bits == 0);
    CHECK(receiver->auth_status(8).level == AuthLevel::partially_accumulated);
    CHECK(receiver->auth_status(9).bits == 128);
}

TEST_CASE("replayed counters and unknown lookups are rejected") {
    for (SchemeKind kind : {SchemeKind::truncated, SchemeKind::compound,
                            SchemeKind::cumac, SchemeKind::trailing}) {
        SchemeParams p = make_params(kind);
        auto sender = make_sender(p, test_key());
        auto receiver = make_receiver(p, test_key());
        auto packets = sender->send(value_payload(5, 32));
        receiver->deliver(packets[0]);
        CHECK_THROWS_AS(receiver->deliver(packets[0]), ReplayError);
        CHECK_THROWS_AS(receiver->auth_status(900), NotFoundError);
    }
}

TEST_CASE("block tags bind the block index or fold the member macs") {
    auto payloads = numbered_payloads(8);

    SchemeParams comp = make_params(SchemeKind::compound);  // n=4
    auto comp_sender = make_sender(comp, test_key());
    std::vector<Packet> comp_packets;
    for (const auto& payload : payloads) {
        auto packets = comp_sender->send(payload);
        comp_packets.push_back(packets[0]);
        comp_sender->ack(packets[0].counter, true);
    }
    for (std::size_t i = 0; i < 8; ++i) {
        if ((i + 1) % 4 != 0) CHECK(comp_packets[i].tag.empty());
    }
    BitString first_block;
    for (std::size_t i = 0; i < 4; ++i) first_block.append(payloads[i]);
    CHECK(comp_packets[3].tag ==
          mac_gen(test_key(), comp.algo, 1, first_block.bytes(), comp.mac));
    BitString second_block;
    for (std::size_t i = 4; i < 8; ++i) second_block.append(payloads[i]);
    CHECK(comp_packets[7].tag ==
          mac_gen(test_key(), comp.algo, 2, second_block.bytes(), comp.mac));

    SchemeParams agg = make_params(SchemeKind::aggregate);
    auto agg_sender = make_sender(agg, test_key());
    std::vector<Packet> agg_packets;
    for (const auto& payload : payloads) {
        auto packets = agg_sender->send(payload);
        agg_packets.push_back(packets[0]);
        agg_sender->ack(packets[0].counter, true);
    }
    BitString folded = sigma_of(agg, 1, payloads[0]);
    for (std::uint32_t c = 2; c <= 4; ++c) {
        folded = folded ^ sigma_of(agg, c, payloads[c - 1]);
    }
    CHECK(agg_packets[3].tag == folded);

    // Delivery: members defer until the block tag, then all settle together.
    auto receiver = make_receiver(agg, test_key());
    for (std::size_t i = 0; i < 4; ++i) {
        auto outcome = receiver->deliver(agg_packets[i]);
        CHECK(outcome.status ==
              (i == 3 ? VerifyStatus::valid : VerifyStatus::deferred));
    }
    for (std::uint32_t c = 1; c <= 4; ++c) {
        AuthReport report = receiver->auth_status(c);
        CHECK(report.bits == 128);
        CHECK(report.at_arrival_bits == 0);
        CHECK(report.level == AuthLevel::full);
    }
}

TEST_CASE("one lost packet spoils its whole block") {
    SchemeParams p = make_params(SchemeKind::aggregate);  // n=4
    auto sender = make_sender(p, test_key());
    auto receiver = make_receiver(p, test_key());
    auto payloads = numbered_payloads(4);

    for (std::size_t i = 0; i < payloads.size(); ++i) {
        auto packets = sender->send(payloads[i]);
        sender->ack(packets[0].counter, true);
        if (packets[0].counter == 2) continue;  // lost in transit
        auto outcome = receiver->deliver(packets[0]);
        if (packets[0].counter == 4) {
            CHECK(outcome.status == VerifyStatus::invalid);
        } else {
            CHECK(outcome.status == VerifyStatus::deferred);
        }
    }
    for (std::uint32_t c : {1u, 3u, 4u}) {
        AuthReport report = receiver->auth_status(c);
        CHECK(report.bits == 0);
        CHECK(report.level == AuthLevel::none);
    }
    CHECK_THROWS_AS(receiver->auth_status(2), NotFoundError);
}

TEST_CASE("a block packet may carry a tag only in the last slot") {
    SchemeParams p = make_params(SchemeKind::compound);
    auto receiver = make_receiver(p, test_key());
    Packet rogue{1, value_payload(1, 8), BitString::from_hex("00112233445566778899aabbccddeeff"), false};
    CHECK_THROWS_AS(receiver->deliver(rogue), FormatError);
}

TEST_CASE("trailing units occupy consecutive counter blocks") {
    SchemeParams p = make_params(SchemeKind::trailing);  // split 2, parts of 64
    auto sender = make_sender(p, test_key());
    BitString first = value_payload(1001, 32);
    BitString second = value_payload(1002, 32);

    auto unit1 = sender->send(first);
    sender->ack(1, true);
    auto unit2 = sender->send(second);
    sender->ack(4, true);

    REQUIRE(unit1.size() == 3);
    CHECK(unit1[0].counter == 1);
    CHECK(unit1[1].counter == 2);
    CHECK(unit1[2].counter == 3);
    CHECK(unit1[0].tag.empty());
    CHECK(unit1[1].payload.empty());
    CHECK(unit1[1].trailing_tag);
    CHECK(unit2[0].counter == 4);
    CHECK(unit2[2].counter == 6);

    // The split parts concatenate to the unit MAC, bound to the message slot.
    BitString mac = unit1[1].tag;
    mac.append(unit1[2].tag);
    CHECK(mac == sigma_of(p, 1, first));
    BitString mac2 = unit2[1].tag;
    mac2.append(unit2[2].tag);
    CHECK(mac2 == sigma_of(p, 4, second));

    auto receiver = make_receiver(p, test_key());
    std::vector<VerifyOutcome> outcomes;
    for (const auto& packet : unit1) outcomes.push_back(receiver->deliver(packet));
    CHECK(outcomes[0].counter == 1);
    CHECK(outcomes[0].status == VerifyStatus::deferred);
    CHECK(outcomes[1].status == VerifyStatus::deferred);
    CHECK(outcomes[2].counter == 1);  // the verdict names the message
    CHECK(outcomes[2].status == VerifyStatus::valid);

    AuthReport report = receiver->auth_status(1);
    CHECK(report.bits == 128);
    CHECK(report.at_arrival_bits == 0);
    CHECK(report.level == AuthLevel::full);
}

TEST_CASE("trailing units settle by what survived the channel") {
    SchemeParams p = make_params(SchemeKind::trailing);
    auto sender = make_sender(p, test_key());

    auto unit1 = sender->send(value_payload(1, 32));   // counters 1..3
    sender->ack(1, true);
    auto unit2 = sender->send(value_payload(2, 32));   // counters 4..6
    sender->ack(4, true);
    auto unit3 = sender->send(value_payload(3, 32));   // counters 7..9
    sender->ack(7, true);

    auto receiver = make_receiver(p, test_key());
    // Unit 1 loses its final part: never settles, stays unauthenticated.
    receiver->deliver(unit1[0]);
    receiver->deliver(unit1[1]);
    // Unit 2 loses an earlier part: the final slot settles it as invalid.
    receiver->deliver(unit2[0]);
    auto u2 = receiver->deliver(unit2[2]);
    CHECK(u2.counter == 4);
    CHECK(u2.status == VerifyStatus::invalid);
    // Unit 3 loses its message: the tag parts alone cannot authenticate.
    auto orphan_mid = receiver->deliver(unit3[1]);
    CHECK(orphan_mid.status == VerifyStatus::deferred);
    auto orphan = receiver->deliver(unit3[2]);
    CHECK(orphan.counter == 7);
    CHECK(orphan.status == VerifyStatus::invalid);

    CHECK(receiver->auth_status(1).bits == 0);
    CHECK(receiver->auth_status(1).level == AuthLevel::none);
    CHECK(receiver->auth_status(4).bits == 0);
    CHECK_THROWS_AS(receiver->auth_status(7), NotFoundError);
}

TEST_CASE("trailing packets are strictly shaped") {
    SchemeParams p = make_params(SchemeKind::trailing);
    BitString payload = value_payload(9, 32);
    BitString part64 = BitString::from_hex("0011223344556677");

    {
        auto receiver = make_receiver(p, test_key());
        CHECK_THROWS_AS(receiver->deliver(Packet{1, BitString(), BitString(), false}),
                        FormatError);
    }
    {
        auto receiver = make_receiver(p, test_key());
        CHECK_THROWS_AS(receiver->deliver(Packet{2, payload, part64, false}),
                        FormatError);
    }
    {
        auto receiver = make_receiver(p, test_key());
        CHECK_THROWS_AS(
            receiver->deliver(Packet{2, BitString(), BitString::from_hex("00ff"), true}),
            FormatError);
    }
    auto sender = make_sender(p, test_key());
    CHECK_THROWS_AS(sender->send(BitString()), ConfigError);
}

TEST_CASE("acks must name the most recent send") {
    for (SchemeKind kind : {SchemeKind::cumac, SchemeKind::trailing}) {
        SchemeParams p = make_params(kind);
        auto sender = make_sender(p, test_key());
        CHECK_THROWS_AS(sender->ack(1, true), ConfigError);
        auto packets = sender->send(value_payload(1, 32));
        CHECK_THROWS_AS(sender->ack(packets[0].counter + 99, true), ConfigError);
        CHECK_NOTHROW(sender->ack(packets[0].counter, true));
    }
}

TEST_CASE("packets serialize to the fixed wire layout and back") {
    Packet p{0x01020304,
             BitString::from_bytes(std::vector<std::uint8_t>{0xff}, 8),
             BitString::from_bytes(std::vector<std::uint8_t>{0xab, 0xcd}, 16),
             false};
    auto bytes = serialize(p);
    CHECK(bytes == std::vector<std::uint8_t>{0x01, 0x02, 0x03, 0x04, 0x00, 0x08,
                                             0xff, 0xab, 0xcd});
    Packet back = deserialize(bytes, 16);
    CHECK(back.counter == p.counter);
    CHECK(back.payload == p.payload);
    CHECK(back.tag == p.tag);
    CHECK_FALSE(back.trailing_tag);

    // Ragged payload widths use the declared bit length, not the byte count.
    Packet ragged{7, value_payload(-3, 13), BitString::from_hex("beef"), false};
    Packet ragged_back = deserialize(serialize(ragged), 16);
    CHECK(ragged_back.payload == ragged.payload);
    CHECK(payload_value(ragged_back.payload) == -3);

    // Standalone tag packets mark themselves on the way back in.
    Packet standalone{9, BitString(), BitString::from_hex("0011223344556677"), true};
    Packet standalone_back = deserialize(serialize(standalone), 64);
    CHECK(standalone_back.trailing_tag);
    CHECK(standalone_back.payload.empty());

    CHECK_THROWS_AS(deserialize({0x00, 0x01, 0x02}, 16), FormatError);
    auto short_buffer = serialize(p);
    short_buffer.pop_back();
    CHECK_THROWS_AS(deserialize(short_buffer, 16), FormatError);
    CHECK_THROWS_AS(serialize(Packet{1, BitString(70000), BitString(), false}),
                    FormatError);
}
