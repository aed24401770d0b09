#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rydtrans/scenarios.hpp"

using namespace rydtrans;
namespace sc = rydtrans::scenarios;

namespace {

enum Exit { ok = 0, usage = 2, config = 3, numeric = 4 };

int fail(int code, const std::string& where, const std::string& what)
{
    std::cerr << "rydtrans: " << where << ": " << what << "\n";
    return code;
}

void print_list()
{
    std::size_t w = 0;
    for (auto& i : sc::registry()) w = std::max(w, i.name.size());
    for (auto& i : sc::registry()) {
        std::cout << i.name << std::string(w + 2 - i.name.size(), ' ') << i.description << " [reproduces: "
                  << i.reproduces << "]\n";
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Driven Rydberg-array transport scenarios"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "list scenarios");

    std::string name;
    auto* defaults = app.add_subcommand("defaults", "print the default config of a scenario");
    defaults->add_option("scenario", name, "scenario name")->required();

    std::string config_path, out_dir;
    std::vector<std::string> sets;
    std::uint64_t seed = 1;
    int threads = 1;
    bool force = false;
    auto* run = app.add_subcommand("run", "run a scenario");
    run->add_option("scenario", name, "scenario name")->required();
    run->add_option("--config", config_path, "JSON config file; keys override the defaults");
    run->add_option("--out", out_dir, "output directory (default out/<scenario>)");
    run->add_option("--set", sets, "override, key.sub=value (repeatable)");
    run->add_option("--seed", seed, "random seed");
    run->add_option("--threads", threads, "worker threads for ensembles")->check(CLI::PositiveNumber);
    run->add_flag("--force", force, "overwrite existing results");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? Exit::ok : Exit::usage;
    }

    if (list->parsed()) {
        print_list();
        return Exit::ok;
    }

    const sc::Info* info = nullptr;
    try {
        info = &sc::find(name);
    } catch (const sc::UnknownScenario& e) {
        return fail(Exit::usage, "usage", e.what());
    }
    if (defaults->parsed()) {
        std::cout << info->defaults.dump(2) << "\n";
        return Exit::ok;
    }

    json cfg;
    sc::Context ctx{seed, threads};
    try {
        json file_cfg;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) return fail(Exit::config, "config", "cannot open " + config_path);
            file_cfg = json::parse(f, nullptr, false);
            if (file_cfg.is_discarded()) return fail(Exit::config, "config", config_path + " is not valid JSON");
        }
        cfg = sc::effective_config(*info, file_cfg, sets);
    } catch (const Error& e) {
        return fail(Exit::config, "config", e.what());
    }

    std::filesystem::path dir = out_dir.empty() ? std::filesystem::path("out") / name : std::filesystem::path(out_dir);
    if (std::filesystem::exists(dir / "summary.json") && !force)
        return fail(Exit::usage, "usage", "output directory " + dir.string() + " already holds results; use --force");

    sc::Result r;
    try {
        r = sc::run(*info, cfg, ctx);
    } catch (const CapacityError& e) {
        return fail(Exit::config, name + ": qspace capacity", e.what());
    } catch (const ConfigError& e) {
        return fail(Exit::config, name + ": config", e.what());
    } catch (const PreconditionError& e) {
        return fail(Exit::config, name + ": precondition", e.what());
    } catch (const BasisMismatch& e) {
        return fail(Exit::config, name + ": basis", e.what());
    } catch (const Error& e) {
        return fail(Exit::numeric, name + ": numeric", e.what());
    }

    json s;
    try {
        s = sc::write_artifacts(dir, *info, cfg, ctx, r, force);
    } catch (const sc::OutputExists& e) {
        return fail(Exit::usage, "usage", e.what());
    } catch (const std::exception& e) {
        return fail(Exit::config, "output", e.what());
    }
    std::cout << s.dump() << "\n";
    if (!r.validity.ok()) return fail(Exit::numeric, name, "state validity check failed");
    return Exit::ok;
}
