// adequacy: batch runner and decision service.
//
//   adequacy SUBCOMMAND [--config PATH] [--out-dir PATH] [overrides...]
//
// Exit status: 0 success, 1 validation or usage error, 2 computation
// infeasible.

#include <adequacy/http_api.hpp>
#include <adequacy/runner.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<double> wind_gw;
    std::vector<double> alphas;
    std::optional<std::size_t> reps;
    std::optional<double> target_eeu;
    std::optional<double> cone;
    std::optional<double> voll;
    std::vector<std::string> exclude_years;
    std::optional<std::string> leave_out_year;
    std::optional<unsigned> threads;
    std::optional<std::string> listen;
    std::optional<std::string> data_dir;
    std::optional<unsigned> workers;
};

void add_options(CLI::App& app, Overrides& o) {
    app.add_option("--config", o.config, "run config (JSON)");
    app.add_option("--out-dir", o.out_dir, "output directory (out_dir)");
    app.add_option("--seed", o.seed, "simulation seed (analysis.seed)");
    app.add_option("--wind-gw", o.wind_gw, "wind levels in GW, comma separated (scenario.wind_gw)")->delimiter(',');
    app.add_option("--alpha", o.alphas, "CVaR alphas, comma separated (analysis.alphas)")->delimiter(',');
    app.add_option("--reps", o.reps, "replications (analysis.replications)");
    app.add_option("--target-eeu-mwh", o.target_eeu, "calibration target (analysis.target_eeu_mwh)");
    app.add_option("--cone", o.cone, "cost of new entry per MW-year (analysis.cone_per_mw_year)");
    app.add_option("--voll", o.voll, "value of lost load per MWh (analysis.voll_per_mwh)");
    app.add_option("--exclude-year", o.exclude_years, "drop a weather year; repeatable (analysis.excluded_years)")
        ->delimiter(',');
    app.add_option("--leave-out-year", o.leave_out_year, "year for leave-one-out runs (analysis.leave_out_year)");
    app.add_option("--threads", o.threads, "simulation threads (analysis.threads)");
    app.add_option("--listen", o.listen, "serve: HOST:PORT (service.listen, env ADEQUACY_LISTEN)");
    app.add_option("--data-dir", o.data_dir, "serve: job store directory (service.data_dir, env ADEQUACY_DATA_DIR)");
    app.add_option("--workers", o.workers, "serve: worker threads (service.workers, env ADEQUACY_WORKERS)");
}

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    return v && *v ? std::optional<std::string>(v) : std::nullopt;
}

adequacy::RunConfig effective_config(const Overrides& o) {
    using namespace adequacy;
    RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
    if (o.out_dir) c.out_dir = *o.out_dir;
    if (o.seed) c.analysis.seed = *o.seed;
    if (!o.wind_gw.empty()) c.scenario.wind_gw = o.wind_gw;
    if (!o.alphas.empty()) c.analysis.alphas = o.alphas;
    if (o.reps) c.analysis.replications = *o.reps;
    if (o.target_eeu) c.analysis.target_eeu_mwh = *o.target_eeu;
    if (o.cone) c.analysis.cone_per_mw_year = *o.cone;
    if (o.voll) c.analysis.voll_per_mwh = *o.voll;
    for (const auto& y : o.exclude_years)
        if (std::find(c.analysis.excluded_years.begin(), c.analysis.excluded_years.end(), y) ==
            c.analysis.excluded_years.end())
            c.analysis.excluded_years.push_back(y);
    if (o.leave_out_year) c.analysis.leave_out_year = *o.leave_out_year;
    if (o.threads) c.analysis.threads = *o.threads;

    if (auto v = env("ADEQUACY_LISTEN")) c.service.listen = *v;
    if (auto v = env("ADEQUACY_DATA_DIR")) c.service.data_dir = *v;
    if (auto v = env("ADEQUACY_WORKERS")) {
        try {
            c.service.workers = static_cast<unsigned>(std::stoul(*v));
        } catch (const std::exception&) {
            throw ValidationError("ADEQUACY_WORKERS must be a positive integer, got '" + *v + "'");
        }
    }
    if (o.listen) c.service.listen = *o.listen;
    if (o.data_dir) c.service.data_dir = *o.data_dir;
    if (o.workers) c.service.workers = *o.workers;
    validate(c);
    return c;
}

// First positional token, when it is not a subcommand. Every option takes a
// value, so the token after a bare --option is skipped.
std::optional<std::string> unknown_subcommand(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string tok = argv[i];
        if (tok == "-h" || tok == "--help") continue;
        if (tok.rfind("-", 0) == 0) {
            if (tok.find('=') == std::string::npos) ++i;
            continue;
        }
        for (const auto& sc : adequacy::subcommands())
            if (tok == sc.name) return std::nullopt;
        return tok;
    }
    return std::nullopt;
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

int serve(const adequacy::RunConfig& c) {
    using namespace adequacy;
    const auto addr = parse_listen(c.service.listen);
    ScenarioService service(c, {c.service.data_dir, c.service.workers});
    httplib::Server server;
    register_routes(server, service);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    if (!server.bind_to_port(addr.host, addr.port)) {
        std::cerr << "error: cannot listen on " << c.service.listen << "\n";
        return 1;
    }
    std::cerr << "listening on " << c.service.listen << ", data in " << c.service.data_dir.string() << "\n";
    server.listen_after_bind();
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resource adequacy risk engine"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    add_options(app, o);
    for (const auto& sc : adequacy::subcommands()) app.add_subcommand(sc.name, sc.description)->fallthrough();

    if (const auto unknown = unknown_subcommand(argc, argv)) {
        std::cerr << "error: unknown subcommand '" << *unknown << "'\n\n" << app.help();
        return 1;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const auto config = effective_config(o);
        if (name == "serve") return serve(config);
        for (const auto& f : adequacy::run_subcommand(name, config))
            std::cout << (config.out_dir / f).string() << "\n";
        return 0;
    } catch (const adequacy::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const adequacy::ComputationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
