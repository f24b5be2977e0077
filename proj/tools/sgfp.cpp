// Command-line laboratory for smooth fictitious play in stochastic games:
// game inspection and generation, fixed-point oracles, experiment execution.
//
// Exit codes: 0 success, 1 domain failure, 2 usage or parse error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgfp/game.hpp"
#include "sgfp/game_io.hpp"
#include "sgfp/harness.hpp"
#include "sgfp/oracles.hpp"

namespace {

int cmd_check_game(const std::string& path) {
    sgfp::StochasticGame game = sgfp::load_game(path);
    const auto report = sgfp::validate(game);
    std::cout << "game: " << path << "\n";
    std::cout << "states: " << game.num_states() << ", players: " << game.num_players()
              << ", joint actions: " << game.num_joint_actions()
              << ", discount: " << game.discount() << "\n";
    if (!report.ok()) {
        std::cout << "invalid:\n";
        for (const auto& v : report.violations) std::cout << "  - " << v << "\n";
        return 1;
    }
    std::cout << "valid: yes\n";
    const auto cls = sgfp::classify(game);
    std::cout << "class: " << sgfp::to_string(cls.tag);
    if (cls.tag == sgfp::GameClassTag::Team) {
        std::cout << " (offsets:";
        for (double c : cls.offsets) std::cout << " " << c;
        std::cout << ")";
    }
    std::cout << "\n";
    std::cout << "ergodic: " << sgfp::check_ergodicity(game).to_string() << "\n";
    return 0;
}

int cmd_gen_game(int states, int players, int actions, const std::string& cls_name, double mixing,
                 double discount, uint64_t seed, const std::string& out) {
    const sgfp::GameClassTag cls = sgfp::parse_class(cls_name);
    sgfp::RngStream rng = sgfp::RngStream::derive(seed, 0);
    sgfp::GameDims dims;
    dims.num_states = states;
    dims.action_counts.assign(players, actions);
    dims.discount = discount;
    const auto game = sgfp::random_ergodic_game(dims, cls, mixing, rng);
    sgfp::save_game(game, out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_solve_oracle(const std::string& path, double beta, double tol, const std::string& out) {
    const sgfp::StochasticGame game = sgfp::load_game(path);
    const auto validation = sgfp::validate(game);
    if (!validation.ok()) {
        std::cerr << "error: game invalid: " << validation.violations.front() << "\n";
        return 1;
    }
    const auto cls = sgfp::classify(game);
    const sgfp::ShannonEntropy entropy;

    sgfp::OracleResult result;
    std::string kind;
    if (game.num_players() == 1) {
        kind = "soft_value_iteration";
        result = sgfp::soft_value_iteration(game, beta, tol);
    } else if (cls.tag == sgfp::GameClassTag::ZeroSum) {
        kind = "zero_sum_value_iteration";
        result = sgfp::zs_regularized_value_iteration(game, beta, entropy, tol);
    } else {
        std::cerr << "error: no oracle for class " << sgfp::to_string(cls.tag)
                  << "; evaluate candidate profiles with equilibrium_residuals instead\n";
        return 1;
    }

    nlohmann::ordered_json j;
    j["kind"] = kind;
    j["game"] = path;
    j["class"] = sgfp::to_string(cls.tag);
    j["beta"] = beta;
    j["discount"] = game.discount();
    j["values"] = result.values;
    j["policy"] = result.policy;
    j["residual"] = result.residual;
    j["iterations"] = result.iterations;
    std::ofstream f(out);
    if (!f) {
        std::cerr << "error: cannot open '" << out << "' for writing\n";
        return 1;
    }
    f << j.dump(2) << '\n';
    std::cout << "wrote " << out << " (residual " << result.residual << " after "
              << result.iterations << " iterations)\n";
    return result.residual <= tol ? 0 : 1;
}

int cmd_run(const std::string& config_path) {
    const sgfp::ExperimentConfig cfg = sgfp::load_config(config_path);
    const sgfp::SummaryReport report = sgfp::run_experiment(cfg);
    for (const auto& s : report.seeds) {
        std::cout << "seed " << s.seed << ": " << (s.ok ? "ok" : ("error: " + s.error)) << " ("
                  << s.runtime_sec << " s)\n";
    }
    for (const auto& c : report.checks) {
        std::cout << (c.pass ? "[pass] " : "[fail] ") << c.metric << " median "
                  << c.observed_median << " vs limit " << c.limit << "\n";
    }
    std::cout << "summary: " << (std::filesystem::path(cfg.output_dir) / "summary.json").string()
              << "\n";
    return report.pass ? 0 : 1;
}

int cmd_plot_data(const std::string& dir, const std::string& metric, const std::string& out) {
    std::vector<std::pair<uint64_t, sgfp::Trace>> traces;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("trace_seed", 0) == 0 && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const auto name = f.filename().string();
        const uint64_t seed = std::stoull(name.substr(10, name.size() - 14));
        traces.emplace_back(seed, sgfp::read_trace_csv(f.string()));
    }
    if (traces.empty()) {
        std::cerr << "error: no trace_seed*.csv files in " << dir << "\n";
        return 1;
    }
    const auto table = sgfp::emit_plot_data(traces, metric);
    if (out.empty()) {
        sgfp::write_plot_table(table, std::cout);
    } else {
        std::ofstream f(out);
        if (!f) {
            std::cerr << "error: cannot open '" << out << "' for writing\n";
            return 1;
        }
        sgfp::write_plot_table(table, f);
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smooth fictitious play laboratory for finite discounted stochastic games"};
    app.require_subcommand(1);

    std::string game_path, out_path, config_path, dir, metric, cls_name = "General";
    int states = 2, players = 2, actions = 2;
    double mixing = 0.3, discount = 0.5, beta = 0.1, tol = 1e-9;
    uint64_t seed = 0;

    auto* check = app.add_subcommand("check-game", "validate and classify a game file");
    check->add_option("--game", game_path, "game file")->required();

    auto* gen = app.add_subcommand("gen-game", "generate a random ergodic game");
    gen->add_option("--states", states, "number of states")->required();
    gen->add_option("--players", players, "number of players")->required();
    gen->add_option("--actions", actions, "actions per player")->required();
    gen->add_option("--class", cls_name, "ZeroSum|IdenticalInterest|Team|General");
    gen->add_option("--mixing", mixing, "uniform mixing weight in (0,1]");
    gen->add_option("--discount", discount, "discount factor in (0,1)");
    gen->add_option("--seed", seed, "generator seed")->required();
    gen->add_option("--out", out_path, "output game file")->required();

    auto* solve = app.add_subcommand("solve-oracle", "regularized fixed-point oracle");
    solve->add_option("--game", game_path, "game file")->required();
    solve->add_option("--beta", beta, "regularization temperature");
    solve->add_option("--tol", tol, "residual tolerance");
    solve->add_option("--out", out_path, "output result file")->required();

    auto* runc = app.add_subcommand("run", "run a configured experiment");
    runc->add_option("--config", config_path, "experiment config file")->required();

    auto* plot = app.add_subcommand("plot-data", "emit a long-format metric table from traces");
    plot->add_option("--experiment-dir", dir, "directory with trace_seed*.csv files")->required();
    plot->add_option("--metric", metric, "trace column or derived metric")->required();
    plot->add_option("--out", out_path, "output csv (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (check->parsed()) return cmd_check_game(game_path);
        if (gen->parsed())
            return cmd_gen_game(states, players, actions, cls_name, mixing, discount, seed,
                                out_path);
        if (solve->parsed()) return cmd_solve_oracle(game_path, beta, tol, out_path);
        if (runc->parsed()) return cmd_run(config_path);
        if (plot->parsed()) return cmd_plot_data(dir, metric, out_path);
    } catch (const sgfp::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
