#include "cumac/scheme.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <map>
#include <unordered_map>

#include "cumac/errors.hpp"

namespace cumac {

const char* scheme_name(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::truncated: return "truncated";
        case SchemeKind::trailing: return "trailing";
        case SchemeKind::compound: return "compound";
        case SchemeKind::aggregate: return "aggregate";
        case SchemeKind::cumac: return "cumac";
        case SchemeKind::cumac_spec: return "cumac-s";
    }
    throw ConfigError("unknown scheme kind");
}

SchemeKind scheme_from_name(const std::string& name) {
    for (SchemeKind kind :
         {SchemeKind::truncated, SchemeKind::trailing, SchemeKind::compound,
          SchemeKind::aggregate, SchemeKind::cumac, SchemeKind::cumac_spec}) {
        if (name == scheme_name(kind)) return kind;
    }
    throw ConfigError("unknown scheme '" + name +
                      "' (expected truncated, trailing, compound, aggregate, "
                      "cumac, or cumac-s)");
}

const char* auth_level_name(AuthLevel level) {
    switch (level) {
        case AuthLevel::none: return "none";
        case AuthLevel::real_time: return "real_time";
        case AuthLevel::partially_accumulated: return "partially_accumulated";
        case AuthLevel::full: return "full";
    }
    throw ConfigError("unknown authentication level");
}

const char* verify_status_name(VerifyStatus status) {
    switch (status) {
        case VerifyStatus::valid: return "valid";
        case VerifyStatus::invalid: return "invalid";
        case VerifyStatus::deferred: return "deferred";
    }
    throw ConfigError("unknown verify status");
}

void SchemeParams::validate() const {
    mac.validate();
    if (kind == SchemeKind::trailing) {
        if (trailing_split == 0 || mac.total_bits % trailing_split != 0) {
            throw ConfigError("trailing_split must divide the MAC width");
        }
    }
    if (kind == SchemeKind::cumac_spec) {
        if (!speculation.has_value()) {
            throw ConfigError("cumac-s requires a speculation configuration");
        }
        speculation->validate();
    }
}

bool committed_units(SchemeKind kind) {
    return kind == SchemeKind::trailing || kind == SchemeKind::compound ||
           kind == SchemeKind::aggregate;
}

std::size_t strength_after(const SchemeParams& params, std::size_t packets_seen,
                           bool speculation_correct) {
    params.validate();
    if (packets_seen == 0) {
        throw ConfigError("packets_seen counts the message's own packet");
    }
    const std::size_t L = params.mac.total_bits;
    const std::size_t n = params.mac.segment_count;
    const std::size_t l = params.mac.segment_bits;
    switch (params.kind) {
        case SchemeKind::truncated:
            return l;
        case SchemeKind::trailing:
            return packets_seen - 1 >= params.trailing_split ? L : 0;
        case SchemeKind::compound:
        case SchemeKind::aggregate:
            return packets_seen >= n ? L : 0;
        case SchemeKind::cumac:
            return std::min(packets_seen, n) * l;
        case SchemeKind::cumac_spec:
            return speculation_correct ? L : std::min(packets_seen, n) * l;
    }
    throw ConfigError("unknown scheme kind");
}

std::vector<std::size_t> strength_profile(const SchemeParams& params,
                                          std::size_t max_packets,
                                          bool speculation_correct) {
    std::vector<std::size_t> out;
    out.reserve(max_packets);
    for (std::size_t r = 1; r <= max_packets; ++r) {
        out.push_back(strength_after(params, r, speculation_correct));
    }
    return out;
}

BitString value_payload(std::int64_t value, std::size_t bits) {
    if (bits == 0 || bits > 64) {
        throw ConfigError("value payloads are 1 to 64 bits wide");
    }
    std::uint64_t u = static_cast<std::uint64_t>(value);
    if (bits < 64) {
        u &= (std::uint64_t{1} << bits) - 1;
    }
    std::size_t nbytes = (bits + 7) / 8;
    u <<= nbytes * 8 - bits;  // left-align so the value's MSB is bit 0
    std::vector<std::uint8_t> raw(nbytes);
    for (std::size_t i = 0; i < nbytes; ++i) {
        raw[i] = static_cast<std::uint8_t>(u >> (8 * (nbytes - 1 - i)));
    }
    return BitString::from_bytes(raw, bits);
}

std::int64_t payload_value(const BitString& payload) {
    std::size_t bits = payload.size_bits();
    if (bits == 0 || bits > 64) {
        throw ConfigError("value payloads are 1 to 64 bits wide");
    }
    std::uint64_t u = payload.to_uint64();
    if (bits < 64 && (u >> (bits - 1)) & 1) {
        u |= ~((std::uint64_t{1} << bits) - 1);  // sign-extend
    }
    return static_cast<std::int64_t>(u);
}

namespace {

// ---------------------------------------------------------------------------
// Shared engine for the cumulative schemes. Both endpoints run one: the
// sender to form each tag, the receiver to recompute the tag it expects for
// each delivered message, so a tag is valid exactly when the two engines
// agree. State is keyed by counter, which lets a receiver fed a gapped
// stream keep going; a tag whose inputs are missing is reported incomplete
// instead of guessed.
// ---------------------------------------------------------------------------
class CumulativeEngine {
public:
    CumulativeEngine(const SchemeParams& params, const SecretKey& key)
        : params_(params),
          mac_(key, params.algo, params.mac),
          speculative_(params.kind == SchemeKind::cumac_spec) {
        if (speculative_) {
            spec_config_ = *params.speculation;
        }
    }

    struct StepResult {
        BitString tag;
        bool complete = true;   // every in-range MAC row was available
        bool spec_hit = false;  // payload matched the stored prediction
    };

    StepResult step(std::uint32_t counter, const BitString& payload) {
        const std::uint32_t n = params_.mac.segment_count;
        const std::uint32_t l = params_.mac.segment_bits;
        StepResult out;

        BitString sigma;
        if (speculative_) {
            if (payload.size_bits() == 0 || payload.size_bits() > 64) {
                throw ConfigError(
                    "cumac-s carries integer samples in 1 to 64 bit payloads");
            }
            // Reuse the speculated MAC when the prediction was right; a miss
            // costs one fresh MAC and retires the stale row.
            const SpecRow* mine = find_spec(counter);
            if (mine != nullptr && mine->predicted == payload) {
                out.spec_hit = true;
                sigma = mine->sigma_hat;
            } else {
                sigma = mac_.mac(counter, payload.bytes());
            }
            purge_spec_through(counter);

            state_.history.push_back(payload_value(payload));
            while (state_.history.size() > spec_config_.history_min()) {
                state_.history.pop_front();
            }

            // Predict every message the upcoming tags will reach into. In
            // steady state only the farthest one is new; the rest were
            // predicted on earlier steps and stay as formed.
            for (std::uint32_t j = 2; j <= n; ++j) {
                std::uint32_t target = counter + j - 1;
                if (find_spec(target) != nullptr) continue;
                BitString predicted =
                    predict_payload(target - counter, payload.size_bits());
                BitString sigma_hat = mac_.mac(target, predicted.bytes());
                if (transcript_ != nullptr) {
                    record(transcript_->predicted, target, predicted);
                    record(transcript_->sigma_hat, target, sigma_hat);
                }
                state_.spec_rows.push_back({target, std::move(predicted),
                                            std::move(sigma_hat)});
            }
        } else {
            sigma = mac_.mac(counter, payload.bytes());
        }

        if (transcript_ != nullptr) {
            record(transcript_->sigma, counter, sigma);
        }
        state_.rows.emplace_back(counter, std::move(sigma));
        while (state_.rows.size() > 2 * n) {
            state_.rows.pop_front();
        }

        // Aggregate one segment from each MAC in flight: segment j comes
        // from the MAC formed j - 1 steps ago, so over n tags every segment
        // of a MAC goes out exactly once.
        BitString tag(l);
        for (std::uint32_t j = 1; j <= n; ++j) {
            if (counter < j) continue;
            const BitString* row = find_row(counter - j + 1);
            if (row == nullptr) {
                out.complete = false;
                continue;
            }
            tag ^= row->slice((j - 1) * l, l);
        }
        if (speculative_) {
            for (std::uint32_t j = 2; j <= n; ++j) {
                const SpecRow* row = find_spec(counter + j - 1);
                if (row == nullptr) {
                    out.complete = false;  // defensive; seeding fills these
                    continue;
                }
                tag ^= row->sigma_hat.slice((j - 1) * l, l);
            }
        }
        if (transcript_ != nullptr) {
            record(transcript_->tags, counter, tag);
        }
        out.tag = std::move(tag);
        return out;
    }

    // Rewind support for the sending side: remember / restore everything a
    // step mutates, so a failed delivery can be undone bit for bit.
    void save() { saved_ = state_; }
    void restore() {
        if (!saved_.has_value()) {
            throw ConfigError("no saved state to restore");
        }
        state_ = *saved_;
        saved_.reset();
    }

    void set_transcript(CumulativeTranscript* transcript) {
        transcript_ = transcript;
    }

private:
    struct SpecRow {
        std::uint32_t counter;
        BitString predicted;
        BitString sigma_hat;
    };
    struct State {
        std::deque<std::pair<std::uint32_t, BitString>> rows;  // (counter, MAC)
        std::deque<SpecRow> spec_rows;
        std::deque<std::int64_t> history;
    };

    const BitString* find_row(std::uint32_t counter) const {
        for (auto it = state_.rows.rbegin(); it != state_.rows.rend(); ++it) {
            if (it->first == counter) return &it->second;
        }
        return nullptr;
    }

    const SpecRow* find_spec(std::uint32_t counter) const {
        for (const auto& row : state_.spec_rows) {
            if (row.counter == counter) return &row;
        }
        return nullptr;
    }

    void purge_spec_through(std::uint32_t counter) {
        while (!state_.spec_rows.empty() &&
               state_.spec_rows.front().counter <= counter) {
            state_.spec_rows.pop_front();
        }
    }

    BitString predict_payload(std::uint32_t horizon, std::size_t width) const {
        std::vector<std::int64_t> scratch(state_.history.begin(),
                                          state_.history.end());
        for (std::uint32_t h = 0; h < horizon; ++h) {
            scratch.push_back(predict_next(scratch, spec_config_));
        }
        return value_payload(scratch.back(), width);
    }

    static void record(std::vector<BitString>& column, std::uint32_t counter,
                       const BitString& value) {
        if (column.size() < counter) {
            column.resize(counter);
        }
        column[counter - 1] = value;
    }

    SchemeParams params_;
    MacContext mac_;
    bool speculative_;
    SpeculationConfig spec_config_;
    State state_;
    std::optional<State> saved_;
    CumulativeTranscript* transcript_ = nullptr;
};

AuthLevel level_for(std::size_t bits, std::size_t at_arrival_bits, std::size_t L) {
    if (bits == 0) return AuthLevel::none;
    if (bits == L) return AuthLevel::full;
    return bits > at_arrival_bits ? AuthLevel::partially_accumulated
                                  : AuthLevel::real_time;
}

AuthReport make_report(std::uint32_t counter, std::size_t bits,
                       std::size_t at_arrival_bits, std::size_t L) {
    return AuthReport{counter, bits, at_arrival_bits,
                      level_for(bits, at_arrival_bits, L)};
}

// ---------------------------------------------------------------------------
// Senders
// ---------------------------------------------------------------------------

// Common bookkeeping for the rewinding senders: one packet batch per send,
// and a failed delivery hands the counter back.
class RewindingSender : public Sender {
public:
    explicit RewindingSender(const SchemeParams& params) : params_(params) {}

    void ack(std::uint32_t counter, bool delivered) override {
        if (!ack_pending_ || counter != last_counter_) {
            throw ConfigError("ack must name the most recent send");
        }
        ack_pending_ = false;
        if (!delivered) {
            --next_counter_;
            undo();
        }
    }

    std::uint32_t next_counter() const override { return next_counter_; }
    const SchemeParams& params() const override { return params_; }

protected:
    std::uint32_t consume_counter() {
        last_counter_ = next_counter_;
        ++next_counter_;
        ack_pending_ = true;
        return last_counter_;
    }

    virtual void undo() {}

    SchemeParams params_;

private:
    std::uint32_t next_counter_ = 1;
    std::uint32_t last_counter_ = 0;
    bool ack_pending_ = false;
};

class TruncatedSender final : public RewindingSender {
public:
    TruncatedSender(const SchemeParams& params, const SecretKey& key)
        : RewindingSender(params), mac_(key, params.algo, params.mac) {}

    std::vector<Packet> send(const BitString& payload) override {
        std::uint32_t counter = consume_counter();
        BitString tag =
            mac_.mac(counter, payload.bytes()).slice(0, params_.mac.segment_bits);
        return {Packet{counter, payload, std::move(tag), false}};
    }

private:
    MacContext mac_;
};

class CumulativeSender final : public RewindingSender {
public:
    CumulativeSender(const SchemeParams& params, const SecretKey& key)
        : RewindingSender(params), engine_(params, key) {}

    std::vector<Packet> send(const BitString& payload) override {
        engine_.save();
        std::uint32_t counter = consume_counter();
        auto result = engine_.step(counter, payload);
        return {Packet{counter, payload, std::move(result.tag), false}};
    }

protected:
    void undo() override { engine_.restore(); }

private:
    CumulativeEngine engine_;
};

// Common bookkeeping for the committed senders: emitted packets stand, so
// delivery feedback is checked for protocol sanity and otherwise ignored.
class CommittedSender : public Sender {
public:
    explicit CommittedSender(const SchemeParams& params) : params_(params) {}

    // Packets are committed the moment they are emitted: the feedback only
    // has to name the unit that was sent last (its message counter).
    void ack(std::uint32_t counter, bool) override {
        if (last_unit_ == 0 || counter != last_unit_) {
            throw ConfigError("ack must name the most recent send");
        }
    }

    std::uint32_t next_counter() const override { return next_counter_; }
    const SchemeParams& params() const override { return params_; }

protected:
    std::uint32_t consume_counter() { return next_counter_++; }
    void note_unit(std::uint32_t counter) { last_unit_ = counter; }

    SchemeParams params_;

private:
    std::uint32_t next_counter_ = 1;
    std::uint32_t last_unit_ = 0;
};

class TrailingSender final : public CommittedSender {
public:
    TrailingSender(const SchemeParams& params, const SecretKey& key)
        : CommittedSender(params), mac_(key, params.algo, params.mac) {}

    std::vector<Packet> send(const BitString& payload) override {
        if (payload.empty()) {
            throw ConfigError("the trailing scheme cannot carry empty messages");
        }
        std::uint32_t counter = consume_counter();
        note_unit(counter);
        BitString sigma = mac_.mac(counter, payload.bytes());
        std::uint32_t part_bits = params_.mac.total_bits / params_.trailing_split;
        std::vector<Packet> out;
        out.push_back(Packet{counter, payload, BitString(), false});
        // The MAC follows immediately in standalone packets, each on its own
        // counter, so every unit occupies a fixed block of the counter space.
        for (std::uint32_t k = 0; k < params_.trailing_split; ++k) {
            out.push_back(Packet{consume_counter(), BitString(),
                                 sigma.slice(k * part_bits, part_bits), true});
        }
        return out;
    }

private:
    MacContext mac_;
};

class BlockSender final : public CommittedSender {
public:
    BlockSender(const SchemeParams& params, const SecretKey& key)
        : CommittedSender(params), mac_(key, params.algo, params.mac) {}

    std::vector<Packet> send(const BitString& payload) override {
        std::uint32_t counter = consume_counter();
        note_unit(counter);
        const std::uint32_t n = params_.mac.segment_count;
        BitString tag;
        if (params_.kind == SchemeKind::compound) {
            block_.append(payload);
        } else {
            BitString sigma = mac_.mac(counter, payload.bytes());
            block_ = block_.empty() ? sigma : block_ ^ sigma;
        }
        if ((counter - 1) % n == n - 1) {
            // Block complete: the compound MAC binds the concatenation to the
            // block index, the aggregate one folds the per-message MACs.
            if (params_.kind == SchemeKind::compound) {
                std::uint32_t block_index = (counter - 1) / n + 1;
                tag = mac_.mac(block_index, block_.bytes());
            } else {
                tag = block_;
            }
            block_ = BitString();
        }
        return {Packet{counter, payload, std::move(tag), false}};
    }

private:
    MacContext mac_;
    BitString block_;  // concatenation (compound) or running XOR (aggregate)
};

// ---------------------------------------------------------------------------
// Receivers
// ---------------------------------------------------------------------------

class TruncatedReceiver final : public Receiver {
public:
    TruncatedReceiver(const SchemeParams& params, const SecretKey& key)
        : params_(params), mac_(key, params.algo, params.mac) {}

    VerifyOutcome deliver(const Packet& packet) override {
        if (packet.counter <= last_counter_) {
            throw ReplayError("message counter did not advance");
        }
        last_counter_ = packet.counter;
        BitString expected = mac_.mac(packet.counter, packet.payload.bytes())
                                 .slice(0, params_.mac.segment_bits);
        bool valid = expected == packet.tag;
        std::size_t bits = valid ? params_.mac.segment_bits : 0;
        reports_[packet.counter] =
            make_report(packet.counter, bits, bits, params_.mac.total_bits);
        return {packet.counter, valid ? VerifyStatus::valid : VerifyStatus::invalid};
    }

    AuthReport auth_status(std::uint32_t counter) const override {
        auto it = reports_.find(counter);
        if (it == reports_.end()) {
            throw NotFoundError("no message with that counter was delivered");
        }
        return it->second;
    }

    std::uint32_t last_counter() const override { return last_counter_; }
    const SchemeParams& params() const override { return params_; }

private:
    SchemeParams params_;
    MacContext mac_;
    std::uint32_t last_counter_ = 0;
    std::unordered_map<std::uint32_t, AuthReport> reports_;
};

// Receiver for both cumulative schemes. Segment credit comes in three ways:
// a message's own valid tag vouches for segment 1; each later valid tag
// vouches for one more segment of an earlier message; and under speculation
// a message whose prediction matched collects, on arrival, every segment
// whose covering tag already verified - that is what lifts it to full
// strength with zero delay.
class CumulativeReceiver final : public Receiver {
public:
    CumulativeReceiver(const SchemeParams& params, const SecretKey& key)
        : params_(params), engine_(params, key) {}

    VerifyOutcome deliver(const Packet& packet) override {
        if (packet.counter <= last_counter_) {
            throw ReplayError("message counter did not advance");
        }
        last_counter_ = packet.counter;
        const std::uint32_t n = params_.mac.segment_count;
        const std::uint32_t l = params_.mac.segment_bits;

        auto result = engine_.step(packet.counter, packet.payload);
        bool valid = result.complete && result.tag == packet.tag;
        tag_verdicts_.emplace_back(packet.counter, valid);
        while (tag_verdicts_.size() > 2 * n) {
            tag_verdicts_.pop_front();
        }

        // A valid tag upgrades one segment of each older message it reaches.
        if (valid) {
            for (std::uint32_t j = 2; j <= n; ++j) {
                if (packet.counter < j) break;
                Row* row = find_row(packet.counter - j + 1);
                if (row != nullptr) {
                    row->mask |= std::uint64_t{1} << (j - 1);
                }
            }
        }

        Row row;
        row.counter = packet.counter;
        if (valid) {
            row.mask |= 1;
        }
        // Speculative coverage: tags sent before this message arrived each
        // carried one segment of its predicted MAC, which is its real MAC
        // exactly when the prediction matched.
        if (result.spec_hit) {
            for (std::uint32_t j = 2; j <= n; ++j) {
                if (packet.counter < j) break;
                if (verdict_for(packet.counter - j + 1)) {
                    row.mask |= std::uint64_t{1} << (j - 1);
                }
            }
        }
        row.at_arrival_bits = static_cast<std::size_t>(std::popcount(row.mask)) * l;
        rows_.push_back(row);
        while (rows_.size() > 4 * n) {
            freeze(rows_.front());
            rows_.pop_front();
        }
        return {packet.counter,
                valid ? VerifyStatus::valid : VerifyStatus::invalid};
    }

    AuthReport auth_status(std::uint32_t counter) const override {
        for (const auto& row : rows_) {
            if (row.counter == counter) return report_for(row);
        }
        auto it = frozen_.find(counter);
        if (it == frozen_.end()) {
            throw NotFoundError("no message with that counter was delivered");
        }
        return it->second;
    }

    std::uint32_t last_counter() const override { return last_counter_; }
    const SchemeParams& params() const override { return params_; }

private:
    struct Row {
        std::uint32_t counter = 0;
        std::uint64_t mask = 0;  // bit j-1 set when segment j is verified
        std::size_t at_arrival_bits = 0;
    };

    Row* find_row(std::uint32_t counter) {
        for (auto it = rows_.rbegin(); it != rows_.rend(); ++it) {
            if (it->counter == counter) return &*it;
        }
        return nullptr;
    }

    bool verdict_for(std::uint32_t counter) const {
        for (const auto& [c, valid] : tag_verdicts_) {
            if (c == counter) return valid;
        }
        return false;
    }

    AuthReport report_for(const Row& row) const {
        std::size_t bits = static_cast<std::size_t>(std::popcount(row.mask)) *
                           params_.mac.segment_bits;
        return make_report(row.counter, bits, row.at_arrival_bits,
                           params_.mac.total_bits);
    }

    void freeze(const Row& row) { frozen_[row.counter] = report_for(row); }

    SchemeParams params_;
    CumulativeEngine engine_;
    std::uint32_t last_counter_ = 0;
    std::deque<Row> rows_;
    std::deque<std::pair<std::uint32_t, bool>> tag_verdicts_;
    std::unordered_map<std::uint32_t, AuthReport> frozen_;
};

// Receiver for the compound and aggregate schemes. Messages buffer until
// the block's tag packet; the whole block then verifies together, and a
// block missing any piece can never verify.
class BlockReceiver final : public Receiver {
public:
    BlockReceiver(const SchemeParams& params, const SecretKey& key)
        : params_(params), mac_(key, params.algo, params.mac) {}

    VerifyOutcome deliver(const Packet& packet) override {
        if (packet.counter <= last_counter_) {
            throw ReplayError("message counter did not advance");
        }
        last_counter_ = packet.counter;
        const std::uint32_t n = params_.mac.segment_count;
        std::uint32_t block_index = (packet.counter - 1) / n + 1;
        std::uint32_t position = (packet.counter - 1) % n + 1;
        bool final_position = position == n;
        if (!final_position && !packet.tag.empty()) {
            throw FormatError("only a block's last packet carries a tag");
        }

        Block& block = blocks_[block_index];
        block.payloads[packet.counter] = packet.payload;
        VerifyStatus status = VerifyStatus::deferred;
        if (final_position) {
            bool valid = block.payloads.size() == n &&
                         expected_tag(block_index, block) == packet.tag;
            for (const auto& [counter, _] : block.payloads) {
                std::size_t bits = valid ? params_.mac.total_bits : 0;
                reports_[counter] =
                    make_report(counter, bits, 0, params_.mac.total_bits);
            }
            blocks_.erase(block_index);
            status = valid ? VerifyStatus::valid : VerifyStatus::invalid;
        }
        prune(block_index);
        return {packet.counter, status};
    }

    AuthReport auth_status(std::uint32_t counter) const override {
        auto it = reports_.find(counter);
        if (it != reports_.end()) return it->second;
        std::uint32_t block_index = (counter - 1) / params_.mac.segment_count + 1;
        auto bit = blocks_.find(block_index);
        if (bit != blocks_.end() && bit->second.payloads.count(counter) != 0) {
            return make_report(counter, 0, 0, params_.mac.total_bits);
        }
        throw NotFoundError("no message with that counter was delivered");
    }

    std::uint32_t last_counter() const override { return last_counter_; }
    const SchemeParams& params() const override { return params_; }

private:
    struct Block {
        std::map<std::uint32_t, BitString> payloads;  // counter -> payload
    };

    BitString expected_tag(std::uint32_t block_index, const Block& block) const {
        if (params_.kind == SchemeKind::compound) {
            BitString all;
            for (const auto& [_, payload] : block.payloads) {
                all.append(payload);
            }
            return mac_.mac(block_index, all.bytes());
        }
        BitString agg;
        for (const auto& [counter, payload] : block.payloads) {
            BitString sigma = mac_.mac(counter, payload.bytes());
            agg = agg.empty() ? sigma : agg ^ sigma;
        }
        return agg;
    }

    // Blocks whose tag packet was lost can never verify; once a later block
    // is underway their messages settle as unauthenticated.
    void prune(std::uint32_t current_block) {
        for (auto it = blocks_.begin(); it != blocks_.end();) {
            if (it->first + 1 < current_block) {
                for (const auto& [counter, _] : it->second.payloads) {
                    reports_[counter] =
                        make_report(counter, 0, 0, params_.mac.total_bits);
                }
                it = blocks_.erase(it);
            } else {
                ++it;
            }
        }
    }

    SchemeParams params_;
    MacContext mac_;
    std::uint32_t last_counter_ = 0;
    std::map<std::uint32_t, Block> blocks_;
    std::unordered_map<std::uint32_t, AuthReport> reports_;
};

class TrailingReceiver final : public Receiver {
public:
    TrailingReceiver(const SchemeParams& params, const SecretKey& key)
        : params_(params), mac_(key, params.algo, params.mac) {}

    VerifyOutcome deliver(const Packet& packet) override {
        if (packet.counter <= last_counter_) {
            throw ReplayError("message counter did not advance");
        }
        last_counter_ = packet.counter;
        // Units occupy fixed counter blocks (message, then trailing_split tag
        // packets), so any counter maps to its unit even across losses.
        std::uint32_t base = unit_base(packet.counter);
        std::uint32_t position = packet.counter - base;
        Unit& unit = units_[base];
        if (unit.parts.empty()) {
            unit.parts.resize(params_.trailing_split);
        }
        if (position == 0) {
            if (packet.payload.empty()) {
                throw FormatError("the message slot of a trailing unit carries a payload");
            }
            unit.payload = packet.payload;
            unit.has_message = true;
            prune();
            return {base, VerifyStatus::deferred};
        }
        if (!packet.payload.empty()) {
            throw FormatError("a trailing tag packet carries no payload");
        }
        if (packet.tag.size_bits() != params_.mac.total_bits / params_.trailing_split) {
            throw FormatError("trailing tag part has the wrong width");
        }
        unit.parts[position - 1] = packet.tag;
        if (position < params_.trailing_split) {
            return {base, VerifyStatus::deferred};
        }
        // The unit's last slot just arrived: every piece is in or lost.
        bool complete = unit.has_message;
        BitString tag;
        for (const BitString& part : unit.parts) {
            complete = complete && !part.empty();
            tag.append(part);
        }
        if (complete) {
            unit.valid = tag == mac_.mac(base, unit.payload.bytes());
        }
        unit.settled = true;
        return {base, unit.valid ? VerifyStatus::valid : VerifyStatus::invalid};
    }

    AuthReport auth_status(std::uint32_t counter) const override {
        auto it = units_.find(counter);
        if (it != units_.end() && it->second.has_message) {
            std::size_t bits = it->second.valid ? params_.mac.total_bits : 0;
            return make_report(counter, bits, 0, params_.mac.total_bits);
        }
        auto fit = frozen_.find(counter);
        if (fit == frozen_.end()) {
            throw NotFoundError("no message with that counter was delivered");
        }
        return fit->second;
    }

    std::uint32_t last_counter() const override { return last_counter_; }
    const SchemeParams& params() const override { return params_; }

private:
    struct Unit {
        BitString payload;
        std::vector<BitString> parts;
        bool has_message = false;
        bool settled = false;
        bool valid = false;

        Unit() = default;
    };

    std::uint32_t unit_width() const { return params_.trailing_split + 1; }
    std::uint32_t unit_base(std::uint32_t counter) const {
        return (counter - 1) / unit_width() * unit_width() + 1;
    }

    void prune() {
        while (units_.size() > 8) {
            auto it = units_.begin();
            if (it->second.has_message) {
                std::size_t bits = it->second.valid ? params_.mac.total_bits : 0;
                frozen_[it->first] =
                    make_report(it->first, bits, 0, params_.mac.total_bits);
            }
            units_.erase(it);
        }
    }

    SchemeParams params_;
    MacContext mac_;
    std::uint32_t last_counter_ = 0;
    std::map<std::uint32_t, Unit> units_;
    std::unordered_map<std::uint32_t, AuthReport> frozen_;
};

}  // namespace

std::unique_ptr<Sender> make_sender(const SchemeParams& params, const SecretKey& key) {
    params.validate();
    switch (params.kind) {
        case SchemeKind::truncated:
            return std::make_unique<TruncatedSender>(params, key);
        case SchemeKind::trailing:
            return std::make_unique<TrailingSender>(params, key);
        case SchemeKind::compound:
        case SchemeKind::aggregate:
            return std::make_unique<BlockSender>(params, key);
        case SchemeKind::cumac:
        case SchemeKind::cumac_spec:
            return std::make_unique<CumulativeSender>(params, key);
    }
    throw ConfigError("unknown scheme kind");
}

std::unique_ptr<Receiver> make_receiver(const SchemeParams& params,
                                        const SecretKey& key) {
    params.validate();
    switch (params.kind) {
        case SchemeKind::truncated:
            return std::make_unique<TruncatedReceiver>(params, key);
        case SchemeKind::trailing:
            return std::make_unique<TrailingReceiver>(params, key);
        case SchemeKind::compound:
        case SchemeKind::aggregate:
            return std::make_unique<BlockReceiver>(params, key);
        case SchemeKind::cumac:
        case SchemeKind::cumac_spec:
            return std::make_unique<CumulativeReceiver>(params, key);
    }
    throw ConfigError("unknown scheme kind");
}

CumulativeTranscript run_cumulative(const SchemeParams& params, const SecretKey& key,
                                    const std::vector<BitString>& payloads) {
    params.validate();
    if (params.kind != SchemeKind::cumac && params.kind != SchemeKind::cumac_spec) {
        throw ConfigError("transcripts are defined for the cumulative schemes");
    }
    CumulativeEngine engine(params, key);
    CumulativeTranscript transcript;
    engine.set_transcript(&transcript);
    std::uint32_t counter = 1;
    for (const auto& payload : payloads) {
        engine.step(counter++, payload);
    }
    return transcript;
}

}  // namespace cumac
