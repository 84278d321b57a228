#include "veh/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "veh/config.hpp"
#include "veh/csv.hpp"
#include "veh/errors.hpp"
#include "veh/lyapunov.hpp"
#include "veh/optimize.hpp"
#include "veh/rng.hpp"
#include "veh/sim.hpp"
#include "veh/spectral.hpp"
#include "veh/validate.hpp"

namespace veh::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Overrides {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir;
    std::string method;
    std::string transfer_mode;
    std::string seed;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cli", "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig resolve_config(const Overrides& o, bool uses_evaluator) {
    json doc = o.config_path.empty() ? default_config_json()
                                     : parse_json_text(read_file(o.config_path), o.config_path);
    for (const std::string& s : o.sets) apply_override(doc, s);
    if (!o.seed.empty()) apply_override(doc, "simulate.seed=\"" + o.seed + "\"");
    if (!o.out_dir.empty()) doc["output_dir"] = o.out_dir;
    RunConfig c = load_config(doc);

    if (!o.method.empty()) {
        const EvalMethod m = parse_method(o.method);
        c.sweep.evaluator.method = m;
        c.optimize.options.evaluator.method = m;
    }
    if (!o.transfer_mode.empty()) {
        const TransferMode t = parse_transfer_mode(o.transfer_mode);
        c.sweep.evaluator.transfer = t;
        c.optimize.options.evaluator.transfer = t;
    }
    for (const PowerEvaluator* e : {&c.sweep.evaluator, &c.optimize.options.evaluator}) {
        if (uses_evaluator && e->method == EvalMethod::lyapunov && e->transfer == TransferMode::paper) {
            throw ConfigError("config", "transfer mode 'paper' applies to the spectral method; "
                                        "pass --method spectral");
        }
    }
    return c;
}

fs::path prepare_output(const RunConfig& c) {
    const fs::path dir(c.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cli", "cannot create output directory '" + c.output_dir + "'");
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cli", "cannot write '" + path.string() + "'");
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

const ControlGains& require_gains(const RunConfig& c) {
    if (!c.gains) throw ConfigError("config", "gains: this command needs gains {K_m, K_e}");
    return *c.gains;
}

std::string params_comment(const HarvesterParams& p) {
    return "# zeta_s=" + format_sci(p.zeta_s) + " lambda=" + format_sci(p.lambda) +
           " zeta_h=" + format_sci(p.zeta_h) + " kappa=" + format_sci(p.kappa) +
           " alpha=" + format_sci(p.alpha) + " W=" + format_sci(p.W) + "\n";
}

int cmd_evaluate(const RunConfig& c, TransferMode transfer, std::ostream& out) {
    const ControlGains& g = require_gains(c);
    const StateSpaceModel m = build_closed_loop(c.params, g);
    const double jl = mean_power(m, c.params.W);
    const SpectralPower sp = transfer == TransferMode::paper
                                 ? harvested_power_paper_literal(c.params, g, c.params.W, c.quadrature)
                                 : harvested_power_spectral(m, c.params.W, c.quadrature);
    const double rd = jl > 0.0 ? std::abs(sp.J - jl) / jl : std::abs(sp.J - jl);

    json j{{"K_m", g.K_m},
           {"K_e", g.K_e},
           {"J_lyapunov", jl},
           {"J_spectral", sp.J},
           {"relative_difference", rd},
           {"transfer_mode", to_string(transfer)},
           {"unnormalized_parseval_integral", sp.unnormalized_integral},
           {"omega_max", sp.omega_max},
           {"tail_bound", sp.tail_bound}};
    if (c.physical) j["J_lyapunov_dimensional_W"] = dimensional_power(jl, *c.physical);

    out << "J_lyapunov                     " << format_sci(jl) << "\n";
    out << "J_spectral (" << to_string(transfer) << ")"
        << std::string(transfer == TransferMode::paper ? 13 : 8, ' ') << format_sci(sp.J) << "\n";
    out << "relative_difference            " << format_sci(rd) << "\n";
    out << "unnormalized_parseval_integral " << format_sci(sp.unnormalized_integral) << "\n";
    if (c.physical) {
        out << "J_lyapunov_dimensional [W]     " << format_sci(dimensional_power(jl, *c.physical)) << "\n";
    }
    write_text(prepare_output(c) / "evaluate.json", dump(j));
    return kExitOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
    const SweepResult r = sweep(c.params, c.sweep.km, c.sweep.ke, c.sweep.evaluator);
    std::ostringstream csv;
    csv << params_comment(c.params);
    csv << "# method=" << to_string(r.method) << " transfer_mode=" << to_string(r.transfer) << "\n";
    csv << "# failed_cells=" << r.failures.size() << "\n";
    csv << "K_m,K_e,J,method\n";
    for (std::size_t i = 0; i < r.km_values.size(); ++i) {
        for (std::size_t j = 0; j < r.ke_values.size(); ++j) {
            csv << format_sci(r.km_values[i]) << ',' << format_sci(r.ke_values[j]) << ','
                << format_sci(r.J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << ','
                << to_string(r.method) << '\n';
        }
    }
    const fs::path path = prepare_output(c) / "sweep.csv";
    write_text(path, csv.str());
    const auto [bi, bj] = r.argmax();
    out << "cells        " << r.km_values.size() * r.ke_values.size() << "\n";
    out << "failed       " << r.failures.size() << "\n";
    out << "argmax K_m   " << format_sci(r.km_values[bi]) << "\n";
    out << "argmax K_e   " << format_sci(r.ke_values[bj]) << "\n";
    out << "max J        " << format_sci(r.J(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(bj))) << "\n";
    out << "wrote        " << path.string() << "\n";
    for (const SweepFailure& f : r.failures) {
        out << "failed cell (" << f.i << ", " << f.j << "): " << f.message << "\n";
    }
    return kExitOk;
}

int cmd_optimize(const RunConfig& c, std::ostream& out) {
    const ControlGains init = c.optimize.init;
    const OptimResult r = maximize_gains(c.params, init, c.optimize.options);
    const fs::path path = prepare_output(c) / "optimize.json";
    write_text(path, dump(to_json(r, c.params, c.optimize.options.evaluator)));
    out << "K_m*         " << format_sci(r.gains_star.K_m) << "\n";
    out << "K_e*         " << format_sci(r.gains_star.K_e) << "\n";
    out << "J*           " << format_sci(r.J_star) << "\n";
    out << "iterations   " << r.iterations << "\n";
    out << "converged    " << (r.converged ? "true" : "false") << "\n";
    out << "wrote        " << path.string() << "\n";
    return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
    const ControlGains& g = require_gains(c);
    const StateSpaceModel m = build_closed_loop(c.params, g);
    const fs::path dir = prepare_output(c);
    PowerEstimate e;
    if (c.write_trajectory) {
        const Trajectory t = simulate(m, c.params.W, c.simulate.h, c.simulate.n_steps,
                                      c.simulate.seed, c.simulate.scheme);
        e = estimate_power(t, c.simulate.burn_in, c.simulate.batches);
        std::ofstream csv(dir / "trajectory.csv", std::ios::binary);
        if (!csv) throw ConfigError("cli", "cannot write trajectory.csv");
        write_trajectory_csv(csv, t);
    } else {
        e = simulate_power(m, c.params.W, c.simulate);
    }
    json j = to_json(e);
    j["seed"] = c.simulate.seed;
    j["h"] = c.simulate.h;
    j["n_steps"] = c.simulate.n_steps;
    j["scheme"] = to_string(c.simulate.scheme);
    j["generator"] = kGeneratorName;
    j["J_lyapunov"] = mean_power(m, c.params.W);
    write_text(dir / "power.json", dump(j));
    out << "mean         " << format_sci(e.mean) << "\n";
    out << "std_error    " << format_sci(e.std_error) << "\n";
    out << "J_lyapunov   " << format_sci(mean_power(m, c.params.W)) << "\n";
    return kExitOk;
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
    const ValidationReport report = run_validation(c);
    const std::string table = report.table();
    out << table;
    const fs::path dir = prepare_output(c);
    write_text(dir / "validate.txt", table);
    write_text(dir / "validate.json", dump(report.to_json()));
    return report.all_passed() ? kExitOk : kExitValidationFailed;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Piezoelectric vibration energy harvester: power evaluation and gain tuning", "vehopt"};
    app.require_subcommand(1, 1);

    Overrides o;
    app.add_option("--config", o.config_path, "JSON configuration document");
    app.add_option("--set", o.sets, "Override a config field, e.g. params.lambda=4")->take_all();
    app.add_option("--out", o.out_dir, "Output directory");
    app.add_option("--method", o.method, "lyapunov | spectral");
    app.add_option("--transfer-mode", o.transfer_mode, "statespace | paper");
    app.add_option("--seed", o.seed, "Simulation seed (unsigned 64-bit)");

    CLI::App* evaluate = app.add_subcommand("evaluate", "J by the Lyapunov and spectral routes");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Gain grid sweep to sweep.csv");
    CLI::App* optimize = app.add_subcommand("optimize", "Maximize J over (K_m, K_e) to optimize.json");
    CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo run to trajectory.csv and power.json");
    CLI::App* validate = app.add_subcommand("validate", "Cross-method consistency suite");
    for (CLI::App* sub : {evaluate, sweep_cmd, optimize, simulate_cmd, validate}) {
        sub->fallthrough();
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        const RunConfig c = resolve_config(o, sweep_cmd->parsed() || optimize->parsed());
        if (evaluate->parsed()) {
            const TransferMode t = o.transfer_mode.empty() ? TransferMode::statespace
                                                           : parse_transfer_mode(o.transfer_mode);
            return cmd_evaluate(c, t, out);
        }
        if (sweep_cmd->parsed()) return cmd_sweep(c, out);
        if (optimize->parsed()) return cmd_optimize(c, out);
        if (simulate_cmd->parsed()) return cmd_simulate(c, out);
        return cmd_validate(c, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const InfeasibleGainsError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        err << "numeric error in module '" << e.module() << "': " << e.what() << "\n";
        return kExitNumericError;
    }
}

} // namespace veh::cli
