// Command-line front end: simulate / train / evaluate / report / compare.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ridepool/config.hpp"
#include "ridepool/engine.hpp"
#include "ridepool/metrics.hpp"

namespace fs = std::filesystem;
using namespace ridepool;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<long long> seed;
    std::string out_dir = "out";
    std::vector<std::string> toggles;
    std::vector<std::string> sets;
    bool trace = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "config file (key = value lines)");
    cmd->add_option("--seed", args.seed, "seed override");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--toggle", args.toggles,
                    "dispatch|ridesharing|pricing|darm=on/off (repeatable)");
    cmd->add_option("--set", args.sets, "key=value config override (repeatable)");
    cmd->add_flag("--trace", args.trace, "write per-event trace to <out>/events.log");
}

SimConfig load_config(const CommonArgs& args) {
    SimConfig cfg;
    if (!args.config_path.empty())
        cfg = parse_config_file(args.config_path);
    for (const std::string& t : args.toggles) {
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--toggle expects name=on/off, got '" + t + "'");
        apply_config_entry(cfg, t.substr(0, eq), t.substr(eq + 1));
    }
    for (const std::string& s : args.sets) {
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + s + "'");
        apply_config_entry(cfg, detail::trim(s.substr(0, eq)),
                           detail::trim(s.substr(eq + 1)));
    }
    if (args.seed)
        cfg.seed = static_cast<std::uint64_t>(*args.seed);
    cfg.validate();
    return cfg;
}

bool trace_enabled(const CommonArgs& args) {
    if (args.trace)
        return true;
    const char* env = std::getenv("RIDEPOOL_LOG");
    return env && (std::string(env) == "trace" || std::string(env) == "debug");
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ConfigError("cannot write " + path.string());
    os << content;
}

void write_run_outputs(const fs::path& out, const SimConfig& cfg,
                       const MetricsLog& log) {
    {
        std::ofstream os(out / "metrics.csv", std::ios::binary);
        log.write_ticks_csv(os);
    }
    {
        std::ofstream os(out / "vehicles.csv", std::ios::binary);
        log.write_vehicles_csv(os);
    }
    write_file(out / "summary.txt", summarize(log).to_text());
    std::ostringstream info;
    info << "toggles " << cfg.toggles_label() << "\n"
         << "seed " << cfg.seed << "\n"
         << "grid " << cfg.grid_rows << "x" << cfg.grid_cols << " cell "
         << cfg.cell_km << " km\n"
         << "steps " << cfg.steps << " fleet " << cfg.fleet_size << "\n";
    write_file(out / "run_info.txt", info.str());
}

QFunction load_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open checkpoint '" + path + "'");
    return QFunction::load(is);
}

int cmd_simulate(const CommonArgs& args, const std::string& checkpoint) {
    SimConfig cfg = load_config(args);
    const fs::path out(args.out_dir);
    fs::create_directories(out);
    std::ofstream trace;
    EngineOptions opt;
    if (trace_enabled(args)) {
        trace.open(out / "events.log");
        opt.trace = &trace;
    }
    Engine engine(cfg, opt);
    if (!checkpoint.empty())
        engine.set_policy(load_checkpoint(checkpoint));
    else if (cfg.use_dispatch)
        std::cerr << "note: dispatching with an untrained policy "
                     "(no --checkpoint given)\n";
    const MetricsLog log = engine.run();
    write_run_outputs(out, cfg, log);
    std::cout << summarize(log).to_text();
    return 0;
}

int cmd_train(const CommonArgs& args, const std::string& resume,
              const std::string& checkpoint_out) {
    SimConfig cfg = load_config(args);
    const fs::path out(args.out_dir);
    fs::create_directories(out);
    const fs::path ckpt =
        checkpoint_out.empty() ? out / "checkpoint.qnet" : fs::path(checkpoint_out);
    {
        // fail before simulating if the checkpoint path is unwritable
        std::ofstream probe(ckpt, std::ios::app);
        if (!probe)
            throw ConfigError("checkpoint path not writable: " + ckpt.string());
    }

    std::ofstream curve(out / "qmax_curve.csv", std::ios::binary);
    curve << "update,tick,loss,mean_qmax,sigma,epsilon\n";

    std::ofstream trace;
    EngineOptions opt;
    opt.training = true;
    opt.explore = true;
    if (trace_enabled(args)) {
        trace.open(out / "events.log");
        opt.trace = &trace;
    }
    long updates = 0;
    Engine* live = nullptr;
    opt.on_learn = [&](long tick, const LearnStats& st) {
        ++updates;
        const double eps = live ? live->policy().epsilon() : 0.0;
        curve << updates << ',' << tick << ',' << detail::fmt(st.loss) << ','
              << detail::fmt(st.mean_qmax) << ',' << detail::fmt(st.sigma) << ','
              << detail::fmt(eps) << "\n";
    };

    Engine engine(cfg, opt);
    live = &engine;
    if (!resume.empty())
        engine.set_policy(load_checkpoint(resume));
    const MetricsLog log = engine.run();
    {
        std::ofstream os(ckpt, std::ios::binary | std::ios::trunc);
        engine.policy().save(os);
    }
    write_run_outputs(out, cfg, log);
    std::cout << "trained " << engine.policy().update_steps() << " updates, "
              << engine.policy().decision_steps() << " decisions\n"
              << "checkpoint: " << ckpt.string() << "\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& checkpoint) {
    if (checkpoint.empty())
        throw ConfigError("evaluate requires --checkpoint");
    SimConfig cfg = load_config(args);
    const fs::path out(args.out_dir);
    fs::create_directories(out);
    std::ofstream trace;
    EngineOptions opt;
    if (trace_enabled(args)) {
        trace.open(out / "events.log");
        opt.trace = &trace;
    }
    Engine engine(cfg, opt);
    engine.set_policy(load_checkpoint(checkpoint));
    const MetricsLog log = engine.run();
    write_run_outputs(out, cfg, log);
    std::cout << summarize(log).to_text();
    return 0;
}

int cmd_report(const CommonArgs& args, const std::string& metrics_path,
               const std::string& vehicles_path) {
    std::ifstream ticks(metrics_path);
    if (!ticks)
        throw ConfigError("cannot open metrics CSV '" + metrics_path + "'");
    std::optional<std::ifstream> vehicles;
    if (!vehicles_path.empty()) {
        vehicles.emplace(vehicles_path);
        if (!*vehicles)
            throw ConfigError("cannot open vehicles CSV '" + vehicles_path + "'");
    }
    const MetricsLog log =
        MetricsLog::read_csv(ticks, vehicles ? &*vehicles : nullptr);
    const std::string text = summarize(log).to_text();
    std::cout << text;
    if (!args.out_dir.empty()) {
        fs::create_directories(args.out_dir);
        write_file(fs::path(args.out_dir) / "summary.txt", text);
    }
    return 0;
}

struct CompareRow {
    std::string label;
    bool dispatch, ridesharing, pricing, darm;
};

// Documented, fixed order: the five reference configurations and the full
// method.
const std::vector<CompareRow> kCompareMatrix = {
    {"!D,!RS,!PS,GM", false, false, false, false},
    {"!D,RS,!PS,GM", false, true, false, false},
    {"D,!RS,!PS,GM", true, false, false, false},
    {"D,RS,!PS,GM", true, true, false, false},
    {"D,RS,PS,GM", true, true, true, false},
    {"D,RS,PS,DARM", true, true, true, true},
};

int cmd_compare(const CommonArgs& args, const std::string& checkpoint, int seeds) {
    SimConfig base = load_config(args);
    if (seeds < 1)
        throw ConfigError("--seeds must be >= 1");
    // checkpoints are a precondition for every dispatch-enabled row
    bool any_dispatch = false;
    for (const CompareRow& r : kCompareMatrix)
        any_dispatch |= r.dispatch;
    QFunction trained = [&]() {
        if (!checkpoint.empty())
            return load_checkpoint(checkpoint);
        if (any_dispatch)
            throw ConfigError("compare requires --checkpoint for the "
                              "dispatch-enabled rows");
        return QFunction(base.policy);
    }();

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    std::ofstream csv(out / "compare.csv", std::ios::binary);
    csv << "config,seed,accept_rate,served,completed,reject_radius,"
           "reject_customer,expired,mean_wait_s,mean_occupied,peak_occupied,"
           "profit_per_hour,km_per_hour,idle_hours,occupancy_pct\n";

    std::ostringstream table;
    table << "config          accept  served  wait_s  occ(mean)  profit/h  km/h\n";
    std::ostringstream seedinfo;
    seedinfo << "seeds:";
    for (int s = 0; s < seeds; ++s)
        seedinfo << " " << base.seed + static_cast<std::uint64_t>(s);
    seedinfo << "\n";

    for (const CompareRow& rowdef : kCompareMatrix) {
        double acc = 0, served = 0, wait = 0, occ = 0, profit = 0, km = 0;
        for (int s = 0; s < seeds; ++s) {
            SimConfig cfg = base;
            cfg.use_dispatch = rowdef.dispatch;
            cfg.use_ridesharing = rowdef.ridesharing;
            cfg.use_pricing = rowdef.pricing;
            cfg.use_darm = rowdef.darm;
            cfg.seed = base.seed + static_cast<std::uint64_t>(s);
            Engine engine(cfg);
            if (rowdef.dispatch) {
                std::ostringstream buf;
                trained.save(buf);
                std::istringstream in(buf.str());
                engine.set_policy(QFunction::load(in));
            }
            const MetricsLog log = engine.run();
            const SummaryReport rep = summarize(log);
            csv << rowdef.label << ',' << cfg.seed << ','
                << detail::fmt(rep.accept_rate) << ',' << rep.served << ','
                << rep.completed << ',' << rep.reject_radius << ','
                << rep.reject_customer << ',' << rep.expired << ','
                << detail::fmt(rep.mean_wait_s) << ','
                << detail::fmt(rep.mean_occupied_vehicles) << ','
                << detail::fmt(rep.peak_occupied_vehicles) << ','
                << detail::fmt(rep.mean_profit_per_hour) << ','
                << detail::fmt(rep.mean_km_per_hour) << ','
                << detail::fmt(rep.mean_idle_hours) << ','
                << detail::fmt(rep.mean_occupancy_pct) << "\n";
            acc += rep.accept_rate;
            served += static_cast<double>(rep.served);
            wait += rep.mean_wait_s;
            occ += rep.mean_occupied_vehicles;
            profit += rep.mean_profit_per_hour;
            km += rep.mean_km_per_hour;
        }
        const double inv = 1.0 / seeds;
        char line[160];
        std::snprintf(line, sizeof line, "%-15s %6.4f %7.0f %7.1f %10.1f %9.2f %5.1f\n",
                      rowdef.label.c_str(), acc * inv, served * inv, wait * inv,
                      occ * inv, profit * inv, km * inv);
        table << line;
    }
    const std::string text = seedinfo.str() + table.str();
    write_file(out / "compare.txt", text);
    std::cout << text;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ridepool: discrete-time ride-sharing fleet simulator"};
    app.require_subcommand(1);

    CommonArgs sim_args, train_args, eval_args, report_args, compare_args;
    std::string sim_ckpt, train_resume, train_ckpt_out, eval_ckpt, compare_ckpt;
    std::string report_metrics, report_vehicles;
    int compare_seeds = 1;

    CLI::App* sim = app.add_subcommand("simulate", "run one configuration");
    add_common(sim, sim_args);
    sim->add_option("--checkpoint", sim_ckpt, "policy checkpoint to load");

    CLI::App* train = app.add_subcommand("train", "run with learning enabled");
    add_common(train, train_args);
    train->add_option("--resume", train_resume, "checkpoint to continue from");
    train->add_option("--checkpoint-out", train_ckpt_out,
                      "where to write the trained checkpoint");

    CLI::App* eval = app.add_subcommand("evaluate", "greedy run from a checkpoint");
    add_common(eval, eval_args);
    eval->add_option("--checkpoint", eval_ckpt, "policy checkpoint to load")
        ->required();

    CLI::App* report = app.add_subcommand("report", "re-render a metrics CSV");
    add_common(report, report_args);
    report->add_option("--metrics", report_metrics, "metrics.csv path")->required();
    report->add_option("--vehicles", report_vehicles, "vehicles.csv path");

    CLI::App* compare =
        app.add_subcommand("compare", "run the six-configuration comparison");
    add_common(compare, compare_args);
    compare->add_option("--checkpoint", compare_ckpt,
                        "trained checkpoint for dispatch-enabled rows");
    compare->add_option("--seeds", compare_seeds, "number of seeds per row");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(sim_args, sim_ckpt);
        if (train->parsed())
            return cmd_train(train_args, train_resume, train_ckpt_out);
        if (eval->parsed())
            return cmd_evaluate(eval_args, eval_ckpt);
        if (report->parsed())
            return cmd_report(report_args, report_metrics, report_vehicles);
        if (compare->parsed())
            return cmd_compare(compare_args, compare_ckpt, compare_seeds);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
