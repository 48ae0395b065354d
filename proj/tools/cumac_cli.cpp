#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cumac/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cumulative message authentication toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string format = "csv";
    std::uint64_t seed = 0;

    struct CommandSpec {
        const char* name;
        const char* help;
    };
    const CommandSpec specs[] = {
        {"simulate", "drive one scheme over a lossy channel"},
        {"busload", "shared-bus capacity sweep across tagging modes"},
        {"energy", "battery service-life sweep across tag sizes"},
        {"speculate", "fit and score message predictors on a trace"},
        {"attack", "forgery success-rate experiments"},
        {"compare", "strength/delay and loss comparison of all schemes"},
    };
    // One subcommand is chosen per invocation, so the flag targets can be
    // shared across all of them.
    for (const CommandSpec& spec : specs) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.help);
        sub->add_option("--config", config_path,
                        "JSON config file merged over the built-in defaults");
        sub->add_option("--seed", seed, "override the command's configured seed");
        sub->add_option("--out", out_dir,
                        "directory for report files (default: print to stdout)");
        sub->add_option("--format", format, "report format: csv or json")
            ->capture_default_str();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        // Help lands here too and must stay a success; anything else is a
        // usage problem and shares the config-error exit code.
        return code == 0 ? 0 : 2;
    }

    CLI::App* active = app.get_subcommands().front();
    cumac::cli::CommonOptions options;
    options.config_path = config_path;
    options.out_dir = out_dir;
    options.format = format;
    if (active->count("--seed") > 0) {
        options.seed = seed;
    }
    return cumac::cli::run_command(active->get_name(), options, std::cout, std::cerr);
}
