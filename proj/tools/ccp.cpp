#include "ccp/cli.hpp"
#include "ccp/error.hpp"
#include "ccp/eval.hpp"
#include "ccp/parallel.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

using namespace ccp;
using namespace ccp::cli;

std::size_t threads_from_env() {
    const char* env = std::getenv("CCP_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    try {
        return static_cast<std::size_t>(std::stoul(env));
    } catch (const std::exception&) {
        throw InputError(std::string("CCP_THREADS must be a nonnegative integer, got '") + env + "'");
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Change point detection with conceptor-filtered reservoirs"};
    app.require_subcommand(1);

    std::size_t threads = 0;
    bool threads_set = false;
    app.add_option_function<std::size_t>(
        "--threads", [&](std::size_t v) { threads = v, threads_set = true; }, "worker threads (0 = all cores)");

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "detect a single change point in a CSV series");
    std::string input, out_dir, config_path;
    std::map<std::string, std::string> overrides;
    auto setting = [&](CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(flag, [&overrides, key](const std::string& v) { overrides[key] = v; },
                                              help);
    };
    detect_cmd->add_option("--input", input, "CSV file, one row per time point")->required();
    detect_cmd->add_option("--out", out_dir, "output directory")->required();
    detect_cmd->add_option("--config", config_path, "key = value settings file");
    setting(detect_cmd, "--t-train", "t_train", "training length");
    setting(detect_cmd, "--t-wash", "t_wash", "washout length (default: estimated)");
    setting(detect_cmd, "--eps-train", "eps_train", "training NRMSE target");
    setting(detect_cmd, "--seed", "seed", "master seed");
    setting(detect_cmd, "--r-ensemble", "r_ensemble", "ensemble size");
    setting(detect_cmd, "--b-count", "b_count", "bootstrap replicates");
    setting(detect_cmd, "--nu", "nu", "weight exponent");
    setting(detect_cmd, "--kappa", "kappa", "weight floor");
    setting(detect_cmd, "--q", "q", "significance level");
    setting(detect_cmd, "--statistic-exponent", "statistic_exponent", "normalizing exponent of M");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "run the detector on simulated scenarios");
    SimulateOptions sim;
    std::string eps_list = "0.04";
    std::string sim_out;
    sim_cmd->add_option("--scenario", sim.scenario_id, "scenario id, e.g. 1b")->required();
    sim_cmd->add_option("--reps", sim.reps, "replications");
    sim_cmd->add_option("--eps-train", eps_list, "comma separated training NRMSE targets");
    sim_cmd->add_option("--seed", sim.seed, "master seed");
    sim_cmd->add_option("--r-ensemble", sim.r_ensemble, "ensemble size");
    sim_cmd->add_option("--b-count", sim.b_count, "bootstrap replicates");
    sim_cmd->add_option("--out", sim_out, "records directory")->required();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "summarize simulation records");
    std::string records_dir, tables_dir;
    double q = eval::kDefaultQ;
    eval_cmd->add_option("--records", records_dir, "records directory")->required();
    eval_cmd->add_option("--q", q, "significance level");
    eval_cmd->add_option("--out", tables_dir, "tables directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kInputError;
    }

    set_thread_count(threads_set ? threads : threads_from_env());

    if (detect_cmd->parsed()) {
        DetectConfig config;
        if (!config_path.empty()) apply_settings(config, read_config_file(config_path));
        apply_settings(config, overrides);
        const auto report = cmd_detect(input, config, out_dir);
        std::cout << "tau_hat=" << report.tau_hat() << " K=" << format_double(report.k())
                  << " p=" << format_double(report.p()) << " reject=" << (report.rejects_null() ? "yes" : "no")
                  << "\n";
    } else if (sim_cmd->parsed()) {
        sim.eps_train = parse_double_list(eps_list);
        const auto summary = cmd_simulate(sim, sim_out);
        std::cout << "computed " << summary.computed << " records, skipped " << summary.skipped << "\n";
    } else if (eval_cmd->parsed()) {
        const auto summary = cmd_evaluate(records_dir, q, eval::default_deltas(), tables_dir);
        for (const auto& p : summary.written) std::cout << p.string() << "\n";
    }
    return kSuccess;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ccp::FitError& e) {
        std::cerr << "fit failure: " << e.what() << "\n";
        return ccp::cli::kFitFailure;
    } catch (const ccp::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return ccp::cli::kInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return ccp::cli::kInternalError;
    }
}
