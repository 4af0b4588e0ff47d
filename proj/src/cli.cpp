#include "llob/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "llob/analysis.hpp"
#include "llob/core.hpp"
#include "llob/data.hpp"
#include "llob/dual.hpp"
#include "llob/impact.hpp"
#include "llob/pde.hpp"

namespace llob::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) {
        throw ConfigError("cannot write output file: " + (dir / name).string());
    }
    return out;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
};

// ---- simulate ----

int cmd_simulate(const CommonOpts& opts) {
    const json cfg = load_config(opts.config_path);
    if (!cfg.contains("params") || !cfg.contains("metaorder") || !cfg.contains("grid")) {
        throw ConfigError("simulate config needs \"params\", \"metaorder\" and \"grid\"");
    }
    const MetaorderSpec spec = MetaorderSpec::from_json(cfg.at("metaorder"));
    const pde::Grid grid = pde::Grid::from_json(cfg.at("grid"));
    const double dt = cfg.value("dt", 0.0);
    const int output_points = cfg.value("output_points", 2001);
    if (output_points < 2) {
        throw ConfigError("output_points must be >= 2");
    }

    const bool is_dual = cfg.at("params").contains("slow");
    pde::Trajectory traj;
    double scale = 0.0;  // sqrt(D Q / J) of the impact-carrying book
    double eta = 0.0;
    json params_echo;
    if (is_dual) {
        const auto params = dual::DualBookParams::from_json(cfg.at("params"));
        traj = dual::run_dual_pde(params, spec, grid, dt);
        scale = std::sqrt(params.slow.D() * spec.Q() / params.slow.J());
        eta = participation_rate(spec, params.fast.J());
        const auto c = dual::crossover(params);
        params_echo = {{"slow",
                        {{"D", params.slow.D()}, {"nu", params.slow.nu()}, {"lam", params.slow.lam()}}},
                       {"fast",
                        {{"D", params.fast.D()}, {"nu", params.fast.nu()}, {"lam", params.fast.lam()}}},
                       {"eta_star", c.eta_star},
                       {"T_dagger", c.T_dagger}};
    } else {
        const auto params = BookParams::from_json(cfg.at("params"));
        traj = pde::run_metaorder(params, spec, grid, dt);
        scale = std::sqrt(params.D() * spec.Q() / params.J());
        eta = participation_rate(spec, params.J());
        params_echo = {{"D", params.D()}, {"nu", params.nu()}, {"lam", params.lam()},
                       {"L", params.L()}, {"J", params.J()}};
    }

    {
        auto out = open_out(opts.out_dir, "trajectory.csv");
        out << "t,price\n";
        const std::size_t n = traj.t.size();
        const std::size_t np = std::min<std::size_t>(output_points, n);
        for (std::size_t k = 0; k < np; ++k) {
            const std::size_t i = (np == 1) ? 0 : (k * (n - 1)) / (np - 1);
            out << fmt(traj.t[i]) << ',' << fmt(traj.price[i]) << '\n';
        }
    }
    {
        json summary = {
            {"impact", traj.impact},
            {"eta", eta},
            {"F_implied", traj.impact / scale},
            {"mode", is_dual ? "dual" : "single"},
            {"params", params_echo},
            {"metaorder", {{"Q", spec.Q()}, {"T", spec.T()}, {"sign", spec.sign()}}},
            {"grid",
             {{"x_min", grid.x_min()}, {"x_max", grid.x_max()}, {"n_cells", grid.n_cells()}}},
            {"dt", dt == 0.0 ? json("cfl-default") : json(dt)},
            {"output_points", output_points},
            {"steps", traj.t.size() - 1},
            {"warnings", traj.warnings},
        };
        auto out = open_out(opts.out_dir, "summary.json");
        out << summary.dump(2) << '\n';
    }
    return kExitOk;
}

// ---- scaling-fn ----

int cmd_scaling_fn(const CommonOpts& opts) {
    const json cfg = load_config(opts.config_path);
    if (!cfg.contains("eta_min") || !cfg.contains("eta_max") || !cfg.contains("n_points")) {
        throw ConfigError("scaling-fn config needs \"eta_min\", \"eta_max\", \"n_points\"");
    }
    const double lo = cfg.at("eta_min").get<double>();
    const double hi = cfg.at("eta_max").get<double>();
    const int np = cfg.at("n_points").get<int>();
    const int n_steps = cfg.value("n_steps", 800);
    const double tol = cfg.value("tol", 1e-9);
    if (!(lo > 0.0) || !(hi > lo) || np < 2) {
        throw ConfigError("scaling-fn: need 0 < eta_min < eta_max and n_points >= 2");
    }
    auto out = open_out(opts.out_dir, "scaling_fn.csv");
    out << "eta,F\n";
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < np; ++i) {
        const double eta = std::exp(llo + (lhi - llo) * i / (np - 1));
        out << fmt(eta) << ',' << fmt(scaling_function(eta, n_steps, tol)) << '\n';
    }
    return kExitOk;
}

// ---- synth ----

int cmd_synth(const CommonOpts& opts, std::optional<std::uint64_t> seed_flag) {
    json cfg = load_config(opts.config_path);
    auto synth_cfg = data::SynthConfig::from_json(cfg);
    if (seed_flag) {
        synth_cfg.seed = *seed_flag;
    }
    const auto records = data::synth_generate(synth_cfg);
    auto out = open_out(opts.out_dir, "records.csv");
    data::write_csv(out, records);
    return kExitOk;
}

// ---- fit ----

json bin_to_json(const analysis::FitResult& f) {
    return {{"eta_star", f.eta_star},
            {"amplitude", f.amplitude},
            {"residual", f.residual},
            {"bins_used", f.bins_used}};
}

void write_curve(std::ofstream out, const analysis::ScalingCurve& curve) {
    out << "eta_mean,F_hat,stderr,count\n";
    for (const auto& b : curve.bins) {
        out << fmt(b.eta_mean) << ',' << fmt(b.F_hat) << ',' << fmt(b.se) << ',' << b.count
            << '\n';
    }
}

struct FitOpts {
    std::optional<int> bins;
    std::optional<double> phi_min;
    bool by_duration = false;
    bool eta_star_vs_T = false;
};

int cmd_fit(const CommonOpts& opts, const FitOpts& flags) {
    const json cfg = load_config(opts.config_path);
    if (!cfg.contains("input")) {
        throw ConfigError("fit config needs \"input\" (records CSV path)");
    }
    const std::string input = cfg.at("input").get<std::string>();
    const double phi_min =
        flags.phi_min ? *flags.phi_min : cfg.value("phi_min", 1e-5);
    const int n_bins = flags.bins ? *flags.bins : cfg.value("bins", 30);
    const bool by_duration = flags.by_duration || cfg.value("by_duration", false);
    const bool vs_T = flags.eta_star_vs_T || cfg.value("eta_star_vs_T", false);
    const int n_T_bins = cfg.value("n_T_bins", 5);

    std::ifstream in(input);
    if (!in) {
        throw ConfigError("cannot open input CSV: " + input);
    }
    const auto ingest = data::read_csv(in);
    const auto rows = data::filter_min_size(ingest.rescaled, phi_min);

    json report = {
        {"input", input},
        {"phi_min", phi_min},
        {"bins", n_bins},
        {"n_records", rows.size()},
        {"n_ingested", ingest.records.size()},
        {"n_rejected", ingest.rejects.size()},
    };
    {
        json rej = json::object();
        for (const auto& r : ingest.rejects) {
            const std::string key = data::to_string(r.reason);
            rej[key] = rej.value(key, 0) + 1;
        }
        report["rejects"] = rej;
    }

    const auto& table = ScalingTable::shared();
    const auto finish_error = [&](const std::string& what) {
        report["error"] = what;
        auto out = open_out(opts.out_dir, "report.json");
        out << report.dump(2) << '\n';
        std::cerr << "fit: " << what << '\n';
        return kExitStat;
    };

    analysis::ScalingCurve curve;
    try {
        curve = analysis::bin_scaling(rows, n_bins);
        write_curve(open_out(opts.out_dir, "curve.csv"), curve);
        const auto fit = analysis::fit_eta_star(curve, table);
        if (!fit) {
            return finish_error("crossover not identified (optimum on scan boundary)");
        }
        curve.fit = *fit;
        report["fit"] = bin_to_json(*fit);
        report["eta_star"] = fit->eta_star;
        report["amplitude"] = fit->amplitude;
        report["residual"] = fit->residual;
    } catch (const StatError& e) {
        return finish_error(e.what());
    }

    if (by_duration) {
        const auto halves = analysis::split_by_duration(rows);
        json jd;
        const auto do_half = [&](const std::vector<data::RescaledMetaorder>& half,
                                 const std::string& name) {
            json out = {{"count", half.size()}};
            if (half.empty()) {
                out["error"] = "empty half (degenerate duration split)";
            } else {
                try {
                    auto c = analysis::bin_scaling(half, analysis::default_bins(half.size()));
                    write_curve(open_out(opts.out_dir, "curve_" + name + ".csv"), c);
                    if (const auto f = analysis::fit_eta_star(c, table)) {
                        out["fit"] = bin_to_json(*f);
                    } else {
                        out["error"] = "crossover not identified";
                    }
                } catch (const StatError& e) {
                    out["error"] = e.what();
                }
            }
            jd[name] = out;
        };
        do_half(halves.first, "short");
        do_half(halves.second, "long");
        report["by_duration"] = jd;
    }

    if (vs_T) {
        try {
            const auto scan = analysis::eta_star_vs_T(rows, n_T_bins, table);
            auto out = open_out(opts.out_dir, "eta_star_vs_T.csv");
            out << "T_mean,eta_star\n";
            for (const auto& p : scan.points) {
                if (p.ok) {
                    out << fmt(p.T_mean) << ',' << fmt(p.eta_star) << '\n';
                }
            }
            report["slope_vs_T"] = scan.slope;
            report["slope_vs_T_se"] = scan.slope_se;
        } catch (const StatError& e) {
            report["slope_vs_T_error"] = e.what();
        }
    }

    auto out = open_out(opts.out_dir, "report.json");
    out << report.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"latent order book impact toolkit"};
    app.require_subcommand(1);

    CommonOpts common;
    std::optional<std::uint64_t> seed_flag;
    FitOpts fit_flags;
    std::optional<int> bins_raw;
    std::optional<double> phi_min_raw;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "JSON config file")->required();
        sub->add_option("--out", common.out_dir, "output directory (default .)");
    };

    auto* sim = app.add_subcommand("simulate", "run a metaorder through the book PDE");
    add_common(sim);
    auto* sfn = app.add_subcommand("scaling-fn", "tabulate the crossover scaling function");
    add_common(sfn);
    auto* synth = app.add_subcommand("synth", "generate synthetic metaorder records");
    add_common(synth);
    synth->add_option("--seed", seed_flag, "RNG seed (overrides config)");
    auto* fit = app.add_subcommand("fit", "estimate the scaling curve and crossover");
    add_common(fit);
    fit->add_option("--bins", bins_raw, "number of eta bins (overrides config)");
    fit->add_option("--phi-min", phi_min_raw, "volume-fraction filter (overrides config)");
    fit->add_flag("--by-duration", fit_flags.by_duration, "also fit short/long duration halves");
    fit->add_flag("--eta-star-vs-T", fit_flags.eta_star_vs_T,
                  "also fit eta* per duration quantile bin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        app.exit(e);
        return kExitConfig;
    }

    fit_flags.bins = bins_raw;
    fit_flags.phi_min = phi_min_raw;

    try {
        if (sim->parsed()) {
            return cmd_simulate(common);
        }
        if (sfn->parsed()) {
            return cmd_scaling_fn(common);
        }
        if (synth->parsed()) {
            return cmd_synth(common, seed_flag);
        }
        if (fit->parsed()) {
            return cmd_fit(common, fit_flags);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const StatError& e) {
        std::cerr << "statistical error: " << e.what() << '\n';
        return kExitStat;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace llob::cli
