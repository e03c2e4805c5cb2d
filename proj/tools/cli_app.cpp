#include "cli_app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "CLI11.hpp"
#include "mvasicek/calibration.hpp"
#include "mvasicek/errors.hpp"
#include "mvasicek/model.hpp"
#include "mvasicek/option.hpp"
#include "mvasicek/pde.hpp"
#include "mvasicek/quotes_io.hpp"
#include "mvasicek/simulation.hpp"

namespace mvasicek::cli {

using json = nlohmann::json;

json default_config() {
    return json{
        {"model", {{"a", 0.12}, {"b", 1.9}, {"sigma", 0.35}, {"p", 0.034}, {"q", 0.12}, {"r0", 0.02}}},
        {"bond", {{"T", 1.0}}},
        {"option", {{"S", 0.5}, {"T", 1.0}, {"K", 0.95}}},
        {"simulation",
         {{"horizon", 1.0},
          {"n_steps", 1024},
          {"n_paths", 100000},
          {"seed", 42},
          {"scheme", "euler"},
          {"threads", 0},
          {"claim", "bond"},
          {"paths_out", ""}}},
        {"pde",
         {{"payoff", "bond"},
          {"S", 1.0},
          {"T", 1.0},
          {"K", 0.3},
          {"nx", 201},
          {"ny", 201},
          {"n_time", 400},
          {"width_sd", 6.0},
          {"r0_min", 0.0},
          {"r0_max", 0.1},
          {"r0_step", 0.01},
          {"out", ""},
          {"surface_out", ""}}},
        {"curve",
         {{"t_max", 20.0},
          {"n_points", 240},
          {"quotes", ""},
          {"percent", false},
          {"fit", false},
          {"vasicek_fit", false},
          {"n_restarts", 20},
          {"seed", 0},
          {"out", ""},
          {"svg", ""}}},
        {"calibration",
         {{"quotes", ""},
          {"percent", false},
          {"n_restarts", 20},
          {"seed", 0},
          {"fix_p_zero", false},
          {"out", ""}}},
    };
}

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

// Rejects keys that the defaults do not know, so typos fail loudly.
void check_known_keys(const json& defaults, const json& given, const std::string& where) {
    if (!given.is_object()) {
        throw InputError("config: " + (where.empty() ? std::string("top level") : where) +
                         " must be an object");
    }
    for (const auto& [key, value] : given.items()) {
        if (!defaults.contains(key)) {
            throw InputError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
        }
        if (defaults[key].is_object()) {
            check_known_keys(defaults[key], value, where.empty() ? key : where + "." + key);
        }
    }
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open config file " + path);
    }
    json given;
    try {
        given = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("config file " + path + ": " + e.what());
    }
    json cfg = default_config();
    check_known_keys(cfg, given, "");
    cfg.merge_patch(given);
    return cfg;
}

template <typename T>
T get(const json& cfg, const char* block, const char* key) {
    try {
        return cfg.at(block).at(key).get<T>();
    } catch (const json::exception&) {
        throw InputError(std::string("config: ") + block + "." + key + " has the wrong type");
    }
}

ModelParams model_from(const json& cfg) {
    ModelParams m{get<double>(cfg, "model", "a"),     get<double>(cfg, "model", "b"),
                  get<double>(cfg, "model", "sigma"), get<double>(cfg, "model", "p"),
                  get<double>(cfg, "model", "q"),     get<double>(cfg, "model", "r0")};
    m.validate();
    return m;
}

// Output sink: the named file, or `fallback` when the name is empty.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw InputError("cannot open output file " + path);
            }
            stream_ = file_.get();
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

calib::QuoteSet read_quotes(const json& cfg, const char* block) {
    const auto path = get<std::string>(cfg, block, "quotes");
    if (path.empty()) {
        throw InputError(std::string(block) + ": a quotes file is required");
    }
    return io::parse_quotes(std::filesystem::path(path), get<bool>(cfg, block, "percent"));
}

sim::SimConfig sim_config_from(const json& cfg) {
    sim::SimConfig sc;
    sc.horizon = get<double>(cfg, "simulation", "horizon");
    sc.n_steps = get<std::size_t>(cfg, "simulation", "n_steps");
    sc.n_paths = get<std::size_t>(cfg, "simulation", "n_paths");
    sc.seed = get<std::uint64_t>(cfg, "simulation", "seed");
    sc.threads = get<unsigned>(cfg, "simulation", "threads");
    const auto scheme = get<std::string>(cfg, "simulation", "scheme");
    if (scheme == "euler") {
        sc.scheme = sim::Scheme::euler;
    } else if (scheme == "exact") {
        sc.scheme = sim::Scheme::exact_gaussian;
    } else {
        throw InputError("simulation.scheme must be 'euler' or 'exact'");
    }
    sc.validate();
    return sc;
}

int cmd_bond(const json& cfg, std::ostream& out) {
    const auto m = model_from(cfg);
    const double T = get<double>(cfg, "bond", "T");
    if (!(T > 0.0)) throw InputError("bond.T must be positive");
    out << "T=" << num(T) << "\n";
    out << "price=" << num(bond_price(T, m)) << "\n";
    out << "yield=" << num(yield_at(T, m)) << "\n";
    return kExitOk;
}

int cmd_option(const json& cfg, std::ostream& out) {
    const auto m = model_from(cfg);
    const OptionSpec spec{get<double>(cfg, "option", "S"), get<double>(cfg, "option", "T"),
                          get<double>(cfg, "option", "K")};
    const auto c = call_quote(spec, m);
    const auto p = put_quote(spec, m);
    out << "call=" << num(c.price) << "\n";
    out << "put=" << num(p.price) << "\n";
    out << "d_plus=" << num(c.d_plus) << "\n";
    out << "d_minus=" << num(c.d_minus) << "\n";
    out << "sigma_sq=" << num(c.sigma_sq) << "\n";
    out << "bond_S=" << num(c.bond_S) << "\n";
    out << "bond_T=" << num(c.bond_T) << "\n";
    return kExitOk;
}

int cmd_simulate(const json& cfg, std::ostream& out) {
    const auto m = model_from(cfg);
    const auto sc = sim_config_from(cfg);
    const auto paths_out = get<std::string>(cfg, "simulation", "paths_out");
    if (!paths_out.empty()) {
        Sink sink(paths_out, out);
        sim::write_paths_csv(sim::simulate(m, sc), sink.get());
    }
    const auto claim = get<std::string>(cfg, "simulation", "claim");
    sim::McEstimate est;
    double exact = 0.0;
    if (claim == "bond") {
        est = sim::mc_bond_price(m, sc.horizon, sc);
        exact = bond_price(sc.horizon, m);
    } else if (claim == "call") {
        // Call expiring at the horizon on the bond maturing at option.T.
        const OptionSpec spec{sc.horizon, get<double>(cfg, "option", "T"),
                              get<double>(cfg, "option", "K")};
        spec.validate();
        const auto coef = affine(spec.S, spec.T, m);
        est = sim::mc_claim_price(
            m, spec.S, [&](double r, double u) { return std::max(coef.price(r, u) - spec.K, 0.0); },
            sc);
        exact = call_price(spec, m);
    } else {
        throw InputError("simulation.claim must be 'bond' or 'call'");
    }
    out << "claim=" << claim << "\n";
    out << "n_paths=" << est.n_paths << "\n";
    out << "estimate=" << num(est.estimate) << "\n";
    out << "std_error=" << num(est.std_error) << "\n";
    out << "closed_form=" << num(exact) << "\n";
    out << "z=" << num(est.std_error > 0.0 ? (est.estimate - exact) / est.std_error : 0.0) << "\n";
    return kExitOk;
}

int cmd_pde_price(const json& cfg, std::ostream& out) {
    const auto m = model_from(cfg);
    const double S = get<double>(cfg, "pde", "S");
    const double T = get<double>(cfg, "pde", "T");
    const double K = get<double>(cfg, "pde", "K");
    const auto payoff_name = get<std::string>(cfg, "pde", "payoff");
    const double lo = get<double>(cfg, "pde", "r0_min");
    const double hi = get<double>(cfg, "pde", "r0_max");
    const double step = get<double>(cfg, "pde", "r0_step");
    if (!(step > 0.0) || !(hi >= lo) || lo < 0.0) {
        throw InputError("pde: need 0 <= r0_min <= r0_max and r0_step > 0");
    }
    const auto n_rows = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> r0s(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) r0s[i] = lo + step * static_cast<double>(i);

    pde::Terminal terminal;
    std::function<double(const ModelParams&)> exact;
    if (payoff_name == "bond") {
        if (!(S > 0.0)) throw InputError("pde.S must be positive");
        terminal = [](double, double) { return 1.0; };
        exact = [S](const ModelParams& p) { return bond_price(S, p); };
    } else if (payoff_name == "call") {
        const OptionSpec spec{S, T, K};
        spec.validate();
        terminal = [spec, m](double x, double y) {
            return std::max(bond_price(ModelState{spec.S, x, y}, spec.T, m) - spec.K, 0.0);
        };
        exact = [spec](const ModelParams& p) { return call_price(spec, p); };
    } else {
        throw InputError("pde.payoff must be 'bond' or 'call'");
    }

    pde::GridOptions opts;
    opts.nx = get<std::size_t>(cfg, "pde", "nx");
    opts.ny = get<std::size_t>(cfg, "pde", "ny");
    opts.n_time = get<std::size_t>(cfg, "pde", "n_time");
    opts.width_sd = get<double>(cfg, "pde", "width_sd");
    opts.x_include = r0s;
    const auto grid = pde::default_grid(m, S, opts);
    const auto sol = pde::solve(m, S, terminal, grid);

    const auto surface_out = get<std::string>(cfg, "pde", "surface_out");
    if (!surface_out.empty()) {
        Sink sink(surface_out, out);
        pde::write_surface_csv(sol, sink.get());
    }
    Sink sink(get<std::string>(cfg, "pde", "out"), out);
    auto& os = sink.get();
    os << "r0,pde_value,exact_value\n";
    for (double r0 : r0s) {
        ModelParams p = m;
        p.r0 = r0;
        os << num(r0) << "," << num(pde::value_at(sol, r0, 0.0)) << "," << num(exact(p)) << "\n";
    }
    return kExitOk;
}

calib::CalibrationOptions calib_options(const json& cfg, const char* block) {
    calib::CalibrationOptions o;
    o.n_restarts = get<std::size_t>(cfg, block, "n_restarts");
    o.seed = get<std::uint64_t>(cfg, block, "seed");
    return o;
}

json calibration_json(const calib::CalibrationResult& r, const calib::QuoteSet& quotes) {
    json maturities = json::array();
    for (const auto& q : quotes) maturities.push_back(q.maturity);
    return json{{"a", r.params.a},
                {"b", r.params.b},
                {"sigma", r.params.sigma},
                {"p", r.params.p},
                {"q", r.params.q},
                {"r0", r.params.r0},
                {"sse", r.sse},
                {"converged", r.converged},
                {"residuals", r.residuals},
                {"maturities", maturities},
                {"iterations", r.iterations},
                {"restarts_used", r.restarts_used},
                {"underdetermined", r.underdetermined}};
}

int cmd_calibrate(const json& cfg, std::ostream& out, std::ostream& err) {
    const auto quotes = read_quotes(cfg, "calibration");
    auto opts = calib_options(cfg, "calibration");
    opts.fix_p_zero = get<bool>(cfg, "calibration", "fix_p_zero");
    const auto res = calib::calibrate(quotes, opts);
    if (res.underdetermined) {
        err << "warning: fewer quotes than free parameters; the fit is not unique\n";
    }
    Sink sink(get<std::string>(cfg, "calibration", "out"), out);
    sink.get() << calibration_json(res, quotes).dump(2) << "\n";
    return kExitOk;
}

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
    bool markers = false;
};

// Minimal self-contained SVG line chart.
void write_svg(const std::vector<Series>& series, std::ostream& os) {
    const double W = 720, H = 440, L = 70, R = 20, Tm = 20, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1e-4;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tm - B); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
           << num(std::round(xv * 100) / 100) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
           << num(std::round(yv * 1e5) / 1e3) << "%</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
       << "\" text-anchor=\"middle\">maturity (years)</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* c = colors[i % 3];
        if (s.markers) {
            for (const auto& [x, y] : s.points) {
                os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << c
                   << "\"/>\n";
            }
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : s.points) os << px(x) << "," << py(y) << " ";
            os << "\"/>\n";
        }
        os << "<text x=\"" << W - R - 150 << "\" y=\"" << Tm + 16 * (i + 1) << "\" fill=\"" << c
           << "\">" << s.name << "</text>\n";
    }
    os << "</svg>\n";
}

int cmd_curve(const json& cfg, std::ostream& out, std::ostream& err) {
    ModelParams m = model_from(cfg);
    const double t_max = get<double>(cfg, "curve", "t_max");
    const auto n_points = get<std::size_t>(cfg, "curve", "n_points");
    if (!(t_max > 0.0) || n_points < 1) {
        throw InputError("curve: need t_max > 0 and n_points >= 1");
    }
    const bool fit = get<bool>(cfg, "curve", "fit");
    const bool vasicek_fit = get<bool>(cfg, "curve", "vasicek_fit");
    const bool have_quotes = !get<std::string>(cfg, "curve", "quotes").empty();
    if ((fit || vasicek_fit) && !have_quotes) {
        throw InputError("curve: fitting requires a quotes file");
    }
    calib::QuoteSet quotes;
    if (have_quotes) quotes = read_quotes(cfg, "curve");
    const auto opts = calib_options(cfg, "curve");
    if (fit) {
        const auto res = calib::calibrate(quotes, opts);
        m = res.params;
        err << "fitted: " << calibration_json(res, quotes).dump() << "\n";
    }
    std::optional<ModelParams> classical;
    if (vasicek_fit) {
        auto o = opts;
        o.fix_p_zero = true;
        const auto res = calib::calibrate(quotes, o);
        classical = res.params;
        err << "vasicek fit: " << calibration_json(res, quotes).dump() << "\n";
    }

    // Grid T_k = k t_max / n_points merged with the quote maturities.
    std::vector<std::pair<double, std::optional<double>>> rows;
    for (std::size_t k = 1; k <= n_points; ++k) {
        rows.push_back({t_max * static_cast<double>(k) / static_cast<double>(n_points), std::nullopt});
    }
    for (const auto& q : quotes) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.first == q.maturity; });
        if (it != rows.end()) {
            it->second = q.yield;
        } else {
            rows.push_back({q.maturity, q.yield});
        }
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    Series model_s{"model", {}, false}, vas_s{"Vasicek fit", {}, false}, mkt_s{"market", {}, true};
    Sink sink(get<std::string>(cfg, "curve", "out"), out);
    auto& os = sink.get();
    os << "T,Y_model";
    if (classical) os << ",Y_vasicek_fit";
    if (have_quotes) os << ",y_market";
    os << "\n";
    for (const auto& [T, market] : rows) {
        const double y = yield_at(T, m);
        model_s.points.push_back({T, y});
        os << num(T) << "," << num(y);
        if (classical) {
            const double yv = yield_at(T, *classical);
            vas_s.points.push_back({T, yv});
            os << "," << num(yv);
        }
        if (have_quotes) {
            os << ",";
            if (market) {
                os << num(*market);
                mkt_s.points.push_back({T, *market});
            }
        }
        os << "\n";
    }
    const auto svg = get<std::string>(cfg, "curve", "svg");
    if (!svg.empty()) {
        std::vector<Series> series{model_s};
        if (classical) series.push_back(vas_s);
        if (have_quotes) series.push_back(mkt_s);
        Sink svg_sink(svg, out);
        write_svg(series, svg_sink.get());
    }
    return kExitOk;
}

// A flag that overrides one config entry when given.
struct Override {
    const char* block;
    const char* key;
    std::function<void(json&)> apply;
};

template <typename T>
void add_override(CLI::App* sub, std::vector<Override>& list,
                  std::vector<std::shared_ptr<std::optional<T>>>& store, const std::string& flag,
                  const char* block, const char* key, const std::string& help) {
    auto slot = std::make_shared<std::optional<T>>();
    store.push_back(slot);
    if constexpr (std::is_same_v<T, bool>) {
        sub->add_flag_function(flag, [slot](std::int64_t count) { *slot = count > 0; }, help);
    } else {
        sub->add_option(flag, *slot, help);
    }
    list.push_back({block, key, [slot, block, key](json& cfg) {
                        if (*slot) cfg[block][key] = **slot;
                    }});
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Short-rate model with memory: pricing, simulation, PDE and calibration"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    bool dump_config = false;
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    app.add_flag("--dump-config", dump_config, "Print the effective config as JSON and exit");

    std::vector<Override> overrides;
    std::vector<std::shared_ptr<std::optional<double>>> dbl;
    std::vector<std::shared_ptr<std::optional<long long>>> ints;
    std::vector<std::shared_ptr<std::optional<std::string>>> strs;
    std::vector<std::shared_ptr<std::optional<bool>>> bools;

    const auto model_flags = [&](CLI::App* sub) {
        for (const char* k : {"a", "b", "sigma", "p", "q", "r0"}) {
            add_override(sub, overrides, dbl, std::string("--") + k, "model", k,
                         std::string("model parameter ") + k);
        }
    };

    auto* bond = app.add_subcommand("bond", "Zero-coupon bond price P(0,T) and yield Y(0,T)");
    model_flags(bond);
    add_override(bond, overrides, dbl, "--T", "bond", "T", "bond maturity (years)");

    auto* option = app.add_subcommand("option", "European call and put on a zero-coupon bond");
    model_flags(option);
    add_override(option, overrides, dbl, "--S", "option", "S", "option expiry (years)");
    add_override(option, overrides, dbl, "--T", "option", "T", "bond maturity (years)");
    add_override(option, overrides, dbl, "--K", "option", "K", "strike");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo paths and price estimates");
    model_flags(simulate);
    add_override(simulate, overrides, dbl, "--horizon", "simulation", "horizon", "horizon (years)");
    add_override(simulate, overrides, ints, "--n-steps", "simulation", "n_steps", "time steps");
    add_override(simulate, overrides, ints, "--n-paths", "simulation", "n_paths", "paths");
    add_override(simulate, overrides, ints, "--seed", "simulation", "seed", "RNG seed");
    add_override(simulate, overrides, ints, "--threads", "simulation", "threads",
                 "worker threads (0: all cores); results do not depend on it");
    add_override(simulate, overrides, strs, "--scheme", "simulation", "scheme", "euler | exact");
    add_override(simulate, overrides, strs, "--claim", "simulation", "claim",
                 "bond | call (call uses option.T and option.K, expiring at the horizon)");
    add_override(simulate, overrides, strs, "--paths-out", "simulation", "paths_out",
                 "write every path to this CSV");
    add_override(simulate, overrides, dbl, "--T", "option", "T", "bond maturity for the call claim");
    add_override(simulate, overrides, dbl, "--K", "option", "K", "strike for the call claim");

    auto* pde_cmd = app.add_subcommand("pde-price", "PDE price over a sweep of initial short rates");
    model_flags(pde_cmd);
    add_override(pde_cmd, overrides, strs, "--payoff", "pde", "payoff", "bond | call");
    add_override(pde_cmd, overrides, dbl, "--S", "pde", "S", "payoff time (years)");
    add_override(pde_cmd, overrides, dbl, "--T", "pde", "T", "underlying bond maturity for the call");
    add_override(pde_cmd, overrides, dbl, "--K", "pde", "K", "call strike");
    add_override(pde_cmd, overrides, ints, "--nx", "pde", "nx", "short-rate nodes");
    add_override(pde_cmd, overrides, ints, "--ny", "pde", "ny", "memory-state nodes");
    add_override(pde_cmd, overrides, ints, "--n-time", "pde", "n_time", "time steps");
    add_override(pde_cmd, overrides, dbl, "--width-sd", "pde", "width_sd", "grid half-width in std devs");
    add_override(pde_cmd, overrides, dbl, "--r0-min", "pde", "r0_min", "first r0 of the sweep");
    add_override(pde_cmd, overrides, dbl, "--r0-max", "pde", "r0_max", "last r0 of the sweep");
    add_override(pde_cmd, overrides, dbl, "--r0-step", "pde", "r0_step", "sweep step");
    add_override(pde_cmd, overrides, strs, "--out", "pde", "out", "CSV output file (default stdout)");
    add_override(pde_cmd, overrides, strs, "--surface-out", "pde", "surface_out",
                 "write the t = 0 surface to this CSV");

    auto* curve = app.add_subcommand("curve", "Model yield curve, optionally fitted to quotes");
    model_flags(curve);
    add_override(curve, overrides, dbl, "--t-max", "curve", "t_max", "longest maturity (years)");
    add_override(curve, overrides, ints, "--n-points", "curve", "n_points", "grid points");
    add_override(curve, overrides, strs, "--quotes", "curve", "quotes", "quotes CSV (maturity_years,yield)");
    add_override(curve, overrides, bools, "--percent", "curve", "percent", "quotes are in percent");
    add_override(curve, overrides, bools, "--fit", "curve", "fit", "fit the model to the quotes first");
    add_override(curve, overrides, bools, "--vasicek-fit", "curve", "vasicek_fit",
                 "add the p = 0 fit as a column");
    add_override(curve, overrides, ints, "--n-restarts", "curve", "n_restarts", "calibration restarts");
    add_override(curve, overrides, ints, "--seed", "curve", "seed", "calibration seed");
    add_override(curve, overrides, strs, "--out", "curve", "out", "CSV output file (default stdout)");
    add_override(curve, overrides, strs, "--svg", "curve", "svg", "also write an SVG chart");

    auto* calibrate = app.add_subcommand("calibrate", "Least-squares fit to a yield curve");
    add_override(calibrate, overrides, strs, "--quotes", "calibration", "quotes",
                 "quotes CSV (maturity_years,yield)");
    add_override(calibrate, overrides, bools, "--percent", "calibration", "percent",
                 "quotes are in percent");
    add_override(calibrate, overrides, ints, "--n-restarts", "calibration", "n_restarts", "restarts");
    add_override(calibrate, overrides, ints, "--seed", "calibration", "seed", "restart seed");
    add_override(calibrate, overrides, bools, "--fix-p-zero", "calibration", "fix_p_zero",
                 "fit the p = 0 restriction");
    add_override(calibrate, overrides, strs, "--out", "calibration", "out", "JSON output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        json cfg = config_path.empty() ? default_config() : load_config(config_path);
        for (const auto& o : overrides) o.apply(cfg);
        if (dump_config) {
            out << cfg.dump(2) << "\n";
            return kExitOk;
        }
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "bond") return cmd_bond(cfg, out);
        if (name == "option") return cmd_option(cfg, out);
        if (name == "simulate") return cmd_simulate(cfg, out);
        if (name == "pde-price") return cmd_pde_price(cfg, out);
        if (name == "curve") return cmd_curve(cfg, out, err);
        if (name == "calibrate") return cmd_calibrate(cfg, out, err);
        err << "error: unknown command " << name << "\n";
        return kExitInput;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

} // namespace mvasicek::cli
