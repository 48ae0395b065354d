#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

namespace cumac::cli {

// Options shared by every subcommand, normally filled from the command line.
struct CommonOptions {
    std::string config_path;            // JSON file merged over the defaults
    std::optional<std::uint64_t> seed;  // overrides the command's configured seed
    std::string out_dir;                // empty: tables are streamed to `out`
    std::string format = "csv";         // "csv" or "json"
};

// The complete built-in configuration. configs/defaults.json in the source
// tree is a verbatim dump of this document.
nlohmann::json default_config();

// The defaults overlaid with the user's file, if any, using merge-patch
// semantics: objects merge key by key, arrays and scalars replace outright.
nlohmann::json effective_config(const std::string& config_path);

// Digest of the effective configuration, stamped into JSON reports so a
// result can be traced back to the exact settings that produced it.
std::string config_digest(const nlohmann::json& config);

// Runs one subcommand end to end: simulate, busload, energy, speculate,
// attack, or compare. Each result table is written to out_dir/<table>.<fmt>
// when out_dir is set, otherwise streamed to `out`. Timing goes to `err`
// only, keeping the serialized output identical across reruns. Returns 0 on
// success, 2 for configuration problems (unknown command or format, bad
// config file), and 3 for runtime failures.
int run_command(const std::string& command, const CommonOptions& options,
                std::ostream& out, std::ostream& err);

}  // namespace cumac::cli
