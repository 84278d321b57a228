#include "veh/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "veh/errors.hpp"

namespace veh {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config", path + ": " + what);
}

// Reads fields from one JSON object and rejects keys nobody asked for.
class Block {
public:
    Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key, double fallback) {
        used_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number()) fail(field(key), "expected a number");
        return v.get<double>();
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        used_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            fail(field(key), "expected a nonnegative integer");
        }
        return v.get<std::size_t>();
    }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
        used_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) {
            return v.get<std::uint64_t>();
        }
        if (v.is_string()) {
            try {
                std::size_t pos = 0;
                const std::uint64_t out = std::stoull(v.get<std::string>(), &pos);
                if (pos == v.get<std::string>().size()) return out;
            } catch (const std::exception&) {
            }
        }
        fail(field(key), "expected an unsigned 64-bit integer");
    }

    std::string text(const std::string& key, const std::string& fallback) {
        used_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) fail(field(key), "expected a string");
        return v.get<std::string>();
    }

    bool flag(const std::string& key, bool fallback) {
        used_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) fail(field(key), "expected true or false");
        return v.get<bool>();
    }

    const json* child(const std::string& key) {
        used_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    std::string field(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) fail(field(key), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

template <class F>
auto with_path(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

ControlGains parse_gains(const json& j, const std::string& path, ControlGains fallback) {
    Block b(j, path);
    ControlGains g{b.number("K_m", fallback.K_m), b.number("K_e", fallback.K_e)};
    b.finish();
    with_path(path, [&] {
        require_feasible(g);
        return 0;
    });
    return g;
}

std::vector<double> parse_grid(const json& j, const std::string& path) {
    if (j.is_array()) {
        std::vector<double> out;
        for (const json& v : j) {
            if (!v.is_number()) fail(path, "grid entries must be numbers");
            out.push_back(v.get<double>());
        }
        if (out.empty()) fail(path, "grid must be nonempty");
        return out;
    }
    Block b(j, path);
    std::vector<double> out;
    for (const char* kind : {"linspace", "logspace"}) {
        const json* spec = b.child(kind);
        if (!spec) continue;
        if (!spec->is_array() || spec->size() != 3 || !(*spec)[0].is_number() ||
            !(*spec)[1].is_number() || !(*spec)[2].is_number_integer()) {
            fail(b.field(kind), "expected [lo, hi, count]");
        }
        const double lo = (*spec)[0].get<double>();
        const double hi = (*spec)[1].get<double>();
        const auto n = (*spec)[2].get<std::size_t>();
        if (n == 0) fail(b.field(kind), "count must be >= 1");
        out = std::string(kind) == "linspace" ? linspace(lo, hi, n)
                                              : with_path(b.field(kind), [&] { return logspace(lo, hi, n); });
    }
    if (const json* values = b.child("values")) out = parse_grid(*values, b.field("values"));
    b.finish();
    if (out.empty()) fail(path, "one of values, linspace or logspace is required");
    return out;
}

QuadratureOptions parse_quadrature(const json* j, const std::string& path) {
    QuadratureOptions q;
    if (!j) return q;
    Block b(*j, path);
    q.rel_tol = b.number("rel_tol", q.rel_tol);
    q.abs_tol = b.number("abs_tol", q.abs_tol);
    const std::string policy = b.text("omega_max_policy", "envelope");
    if (policy == "envelope") {
        q.omega_max_policy = TailPolicy::envelope;
    } else if (policy == "fixed") {
        q.omega_max_policy = TailPolicy::fixed;
    } else {
        fail(b.field("omega_max_policy"), "expected envelope or fixed");
    }
    q.omega_max_fixed = b.number("omega_max", q.omega_max_fixed);
    q.max_intervals = b.count("max_intervals", q.max_intervals);
    b.finish();
    with_path(path, [&] {
        q.validate();
        return 0;
    });
    return q;
}

template <class F>
auto parse_enum(Block& b, const std::string& key, const std::string& fallback, F&& parse) {
    const std::string s = b.text(key, fallback);
    try {
        return parse(s);
    } catch (const Error& e) {
        fail(b.field(key), e.what());
    }
}

} // namespace

EvalMethod parse_method(const std::string& s) {
    if (s == "lyapunov") return EvalMethod::lyapunov;
    if (s == "spectral") return EvalMethod::spectral;
    throw ConfigError("config", "method must be lyapunov or spectral, got '" + s + "'");
}

TransferMode parse_transfer_mode(const std::string& s) {
    if (s == "statespace") return TransferMode::statespace;
    if (s == "paper") return TransferMode::paper;
    throw ConfigError("config", "transfer mode must be statespace or paper, got '" + s + "'");
}

Scheme parse_scheme(const std::string& s) {
    if (s == "exact") return Scheme::exact;
    if (s == "euler_maruyama") return Scheme::euler_maruyama;
    throw ConfigError("config", "scheme must be exact or euler_maruyama, got '" + s + "'");
}

json default_config_json() {
    return json{
        {"params",
         {{"zeta_s", 0.01}, {"lambda", 5.0}, {"zeta_h", 0.01}, {"kappa", 0.6}, {"alpha", 10.0}, {"W", 1.0}}},
        {"gains", {{"K_m", 0.1}, {"K_e", 900.0}}},
        {"output_dir", "."},
    };
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("config", "--set expects key=value, got '" + assignment + "'");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("config", "empty key segment in '" + path + "'");
        if (!node->is_object()) {
            if (!node->is_null()) throw ConfigError("config", path + ": parent is not an object");
            *node = json::object();
        }
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::ostringstream msg;
        msg << origin << ":" << line << ":" << column << ": JSON parse error: " << e.what();
        throw ConfigError("config", msg.str());
    }
}

RunConfig load_config(const json& doc) {
    RunConfig c;
    Block root(doc, "");

    const json* physical = root.child("physical");
    const json* params = root.child("params");
    if (physical && params) fail("physical", "give either params or physical, not both");
    if (physical) {
        Block b(*physical, "physical");
        PhysicalParams ph;
        ph.m_s = b.number("m_s", ph.m_s);
        ph.m_h = b.number("m_h", ph.m_h);
        ph.k_s = b.number("k_s", ph.k_s);
        ph.k_h = b.number("k_h", ph.k_h);
        ph.c_s = b.number("c_s", ph.c_s);
        ph.c_h = b.number("c_h", ph.c_h);
        ph.theta = b.number("theta", ph.theta);
        ph.C_p = b.number("C_p", ph.C_p);
        ph.R = b.number("R", ph.R);
        ph.l_c = b.number("l_c", ph.l_c);
        const double W = b.number("W", 1.0);
        b.finish();
        c.params = with_path("physical", [&] { return nondimensionalize(ph, W); });
        c.physical = ph;
    } else if (params) {
        Block b(*params, "params");
        HarvesterParams& p = c.params;
        p.zeta_s = b.number("zeta_s", p.zeta_s);
        p.lambda = b.number("lambda", p.lambda);
        p.zeta_h = b.number("zeta_h", p.zeta_h);
        p.kappa = b.number("kappa", p.kappa);
        p.alpha = b.number("alpha", p.alpha);
        p.W = b.number("W", p.W);
        b.finish();
    }
    with_path(physical ? "physical" : "params", [&] {
        c.params.validate();
        return 0;
    });

    if (const json* g = root.child("gains")) c.gains = parse_gains(*g, "gains", {});
    c.quadrature = parse_quadrature(root.child("quadrature"), "quadrature");

    c.sweep.km = linspace(0.005, 1.0, 200);
    c.sweep.ke = logspace(1.0, 1e4, 200);
    c.sweep.evaluator.quadrature = c.quadrature;
    if (const json* s = root.child("sweep")) {
        Block b(*s, "sweep");
        if (const json* km = b.child("km")) c.sweep.km = parse_grid(*km, "sweep.km");
        if (const json* ke = b.child("ke")) c.sweep.ke = parse_grid(*ke, "sweep.ke");
        c.sweep.evaluator.method = parse_enum(b, "method", "lyapunov", parse_method);
        c.sweep.evaluator.transfer = parse_enum(b, "transfer_mode", "statespace", parse_transfer_mode);
        b.finish();
    }
    for (const double km : c.sweep.km) {
        with_path("sweep.km", [&] {
            require_feasible({km, 0.0});
            return 0;
        });
    }
    for (const double ke : c.sweep.ke) {
        with_path("sweep.ke", [&] {
            require_feasible({1.0, ke});
            return 0;
        });
    }

    if (const json* s = root.child("simulate")) {
        Block b(*s, "simulate");
        SimOptions& o = c.simulate;
        o.h = b.number("h", o.h);
        o.n_steps = b.count("n_steps", o.n_steps);
        o.seed = b.u64("seed", o.seed);
        o.burn_in = b.number("burn_in", o.burn_in);
        o.batches = b.count("batches", o.batches);
        o.scheme = parse_enum(b, "scheme", "exact", parse_scheme);
        c.write_trajectory = b.flag("write_trajectory", c.write_trajectory);
        b.finish();
        if (!(o.h > 0.0)) fail("simulate.h", "must be > 0");
        if (o.n_steps < 1) fail("simulate.n_steps", "must be >= 1");
        if (!(o.burn_in >= 0.0 && o.burn_in <= 0.9)) fail("simulate.burn_in", "must lie in [0, 0.9]");
        if (o.batches < kMinBatches) fail("simulate.batches", "must be >= 16");
    }

    c.optimize.options.evaluator.quadrature = c.quadrature;
    if (const json* s = root.child("optimize")) {
        Block b(*s, "optimize");
        if (const json* init = b.child("init")) c.optimize.init = parse_gains(*init, "optimize.init", c.optimize.init);
        OptimOptions& o = c.optimize.options;
        o.max_iterations = b.count("max_iterations", o.max_iterations);
        o.tol = b.number("tol", o.tol);
        o.initial_step = b.number("initial_step", o.initial_step);
        o.starts = b.count("starts", o.starts);
        o.evaluator.method = parse_enum(b, "method", "lyapunov", parse_method);
        o.evaluator.transfer = parse_enum(b, "transfer_mode", "statespace", parse_transfer_mode);
        b.finish();
        if (!(o.tol > 0.0)) fail("optimize.tol", "must be > 0");
        if (!(o.initial_step > 0.0)) fail("optimize.initial_step", "must be > 0");
        if (o.starts < 1) fail("optimize.starts", "must be >= 1");
    }

    ValidateConfig& v = c.validate;
    for (const double km : {0.1, 0.3, 0.5}) {
        for (const double ke : {900.0, 925.0, 950.0}) v.gain_pairs.push_back({km, ke});
    }
    if (const json* s = root.child("validate")) {
        Block b(*s, "validate");
        if (const json* pairs = b.child("gain_pairs")) {
            if (!pairs->is_array() || pairs->empty()) fail("validate.gain_pairs", "expected a nonempty array");
            v.gain_pairs.clear();
            for (std::size_t k = 0; k < pairs->size(); ++k) {
                v.gain_pairs.push_back(parse_gains((*pairs)[k], "validate.gain_pairs[" + std::to_string(k) + "]", {}));
            }
        }
        v.cross_method_rel_tol = b.number("cross_method_rel_tol", v.cross_method_rel_tol);
        if (const json* g = b.child("mc_gains")) v.mc_gains = parse_gains(*g, "validate.mc_gains", v.mc_gains);
        v.mc_h = b.number("mc_h", v.mc_h);
        v.mc_steps = b.count("mc_steps", v.mc_steps);
        v.mc_seeds = b.count("mc_seeds", v.mc_seeds);
        v.stability_draws = b.count("stability_draws", v.stability_draws);
        v.stability_seed = b.u64("stability_seed", v.stability_seed);
        b.finish();
        if (!(v.mc_h > 0.0)) fail("validate.mc_h", "must be > 0");
        if (v.mc_seeds < 1) fail("validate.mc_seeds", "must be >= 1");
    }

    c.output_dir = root.text("output_dir", c.output_dir);
    root.finish();
    return c;
}

json to_json(const OptimResult& r, const HarvesterParams& p, const PowerEvaluator& e) {
    json trace = json::array();
    for (const TracePoint& t : r.trace) {
        trace.push_back({{"K_m", t.gains.K_m}, {"K_e", t.gains.K_e}, {"J", t.J}});
    }
    json starts = json::array();
    for (const StartRecord& s : r.starts) {
        starts.push_back({{"init", {{"K_m", s.init.K_m}, {"K_e", s.init.K_e}}},
                          {"gains_star", {{"K_m", s.gains_star.K_m}, {"K_e", s.gains_star.K_e}}},
                          {"J_star", s.J_star},
                          {"iterations", s.iterations},
                          {"converged", s.converged}});
    }
    return json{
        {"params",
         {{"zeta_s", p.zeta_s}, {"lambda", p.lambda}, {"zeta_h", p.zeta_h}, {"kappa", p.kappa}, {"alpha", p.alpha}, {"W", p.W}}},
        {"method", to_string(e.method)},
        {"transfer_mode", to_string(e.transfer)},
        {"gains_star", {{"K_m", r.gains_star.K_m}, {"K_e", r.gains_star.K_e}}},
        {"J_star", r.J_star},
        {"iterations", r.iterations},
        {"converged", r.converged},
        {"trace", trace},
        {"starts", starts},
    };
}

OptimResult optim_result_from_json(const json& j) {
    try {
        OptimResult r;
        r.gains_star = {j.at("gains_star").at("K_m").get<double>(), j.at("gains_star").at("K_e").get<double>()};
        r.J_star = j.at("J_star").get<double>();
        r.iterations = j.at("iterations").get<std::size_t>();
        r.converged = j.at("converged").get<bool>();
        for (const json& t : j.at("trace")) {
            r.trace.push_back({{t.at("K_m").get<double>(), t.at("K_e").get<double>()}, t.at("J").get<double>()});
        }
        for (const json& s : j.at("starts")) {
            StartRecord rec;
            rec.init = {s.at("init").at("K_m").get<double>(), s.at("init").at("K_e").get<double>()};
            rec.gains_star = {s.at("gains_star").at("K_m").get<double>(), s.at("gains_star").at("K_e").get<double>()};
            rec.J_star = s.at("J_star").get<double>();
            rec.iterations = s.at("iterations").get<std::size_t>();
            rec.converged = s.at("converged").get<bool>();
            r.starts.push_back(rec);
        }
        return r;
    } catch (const json::exception& e) {
        throw ConfigError("config", std::string("malformed optimization result: ") + e.what());
    }
}

json to_json(const PowerEstimate& e) {
    return json{{"mean", e.mean},
                {"std_error", e.std_error},
                {"burn_in_steps", e.burn_in_steps},
                {"samples", e.samples},
                {"batches", e.batches}};
}

PowerEstimate power_estimate_from_json(const json& j) {
    try {
        PowerEstimate e;
        e.mean = j.at("mean").get<double>();
        e.std_error = j.at("std_error").get<double>();
        e.burn_in_steps = j.at("burn_in_steps").get<std::size_t>();
        e.samples = j.at("samples").get<std::size_t>();
        e.batches = j.at("batches").get<std::size_t>();
        return e;
    } catch (const json::exception& e) {
        throw ConfigError("config", std::string("malformed power estimate: ") + e.what());
    }
}

} // namespace veh
