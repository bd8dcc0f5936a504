// Config-driven entry point: train / attack / sweep / search / explain run a
// single experiment config; report merges finished result directories.

#include <CLI11.hpp>

#include <optional>
#include <string>
#include <vector>

#include "tabdoor/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"tabdoor: backdoor-attack experiments on tabular models"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<double> max_poison_fraction;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "experiment config file (JSON)")->required();
        sub->add_option("-o,--out", out, "output directory (overrides config and TABDOOR_OUT)");
        sub->add_option("--seed", seed, "global seed override");
        sub->add_option("--jobs", jobs, "worker threads for repetitions");
        sub->add_option("--max-poison-fraction", max_poison_fraction,
                        "refuse schedules above this fraction of the train split; <= 0 disables");
    };

    const std::pair<const char*, const char*> commands[] = {
        {"train", "fit a clean model and report test metrics"},
        {"attack", "run an injection schedule with retrain-and-measure"},
        {"sweep", "run the attack across model complexity tiers"},
        {"search", "rank candidate attack samples by effectiveness"},
        {"explain", "Shapley attributions for selected test rows"},
    };
    for (const auto& [name, desc] : commands) add_common(app.add_subcommand(name, desc));

    auto* report = app.add_subcommand("report", "merge result directories");
    std::vector<std::string> result_dirs;
    std::string report_out = "out/report";
    report->add_option("dirs", result_dirs, "result directories")->required();
    report->add_option("-o,--out", report_out, "report output directory");

    CLI11_PARSE(app, argc, argv);

    const CLI::App* sub = app.get_subcommands().front();
    if (sub->get_name() == "report") return tabdoor::cmd_report(result_dirs, report_out);

    tabdoor::CliOverrides overrides{out, seed, jobs, max_poison_fraction};
    return tabdoor::run_command(sub->get_name(), config_path, overrides);
}
