#include "mvasicek/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

namespace mvasicek::sim {

void SimConfig::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InputError("sim config: horizon must be positive");
    }
    if (n_steps < 1) throw InputError("sim config: n_steps must be >= 1");
    if (n_paths < 1) throw InputError("sim config: n_paths must be >= 1");
}

PathRng::PathRng(std::uint64_t seed, std::uint64_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    engine_.seed(seq);
}

double PathRng::normal() { return normal_(engine_); }

namespace {

// Per-step coefficients on the uniform grid, shared read-only by all workers.
struct StepTable {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> memory_drift; // sigma p e^{-(p+q) t_k}
    std::vector<double> u_vol;        // e^{(p+q) t_k} l(t_k)

    struct Exact {
        GaussianTransition tr;
        double l11 = 0.0;
        double l21 = 0.0;
        double l22 = 0.0;
    };
    std::vector<Exact> exact;
};

StepTable make_table(const ModelParams& params, double horizon, std::size_t n_steps, Scheme scheme) {
    StepTable tab;
    tab.dt = horizon / static_cast<double>(n_steps);
    tab.times.resize(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) {
        tab.times[k] = static_cast<double>(k) * tab.dt;
    }
    tab.times.back() = horizon;
    tab.memory_drift.resize(n_steps);
    tab.u_vol.resize(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = tab.times[k];
        tab.memory_drift[k] = params.sigma * params.p * std::exp(-(params.p + params.q) * t);
        tab.u_vol[k] = u_diffusion(t, params);
    }
    if (scheme == Scheme::exact_gaussian) {
        tab.exact.resize(n_steps);
        for (std::size_t k = 0; k < n_steps; ++k) {
            auto& e = tab.exact[k];
            e.tr = gaussian_transition(tab.times[k], tab.times[k + 1] - tab.times[k], params);
            e.l11 = std::sqrt(std::max(e.tr.var_r, 0.0));
            e.l21 = e.l11 > 0.0 ? e.tr.cov_ru / e.l11 : 0.0;
            e.l22 = std::sqrt(std::max(e.tr.var_u - e.l21 * e.l21, 0.0));
        }
    }
    return tab;
}

struct PathBuffers {
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> int_r;
    std::vector<double> dW;

    explicit PathBuffers(std::size_t n_steps)
        : r(n_steps + 1), u(n_steps + 1), int_r(n_steps + 1), dW(n_steps) {}
};

[[noreturn]] void blow_up(std::size_t path, std::size_t step) {
    std::ostringstream msg;
    msg << "simulation: non-finite state on path " << path << " at step " << step;
    throw NumericalError(msg.str());
}

// Euler-Maruyama for the coupled (r, u) system; one increment drives both.
void euler_path(const ModelParams& params, const StepTable& tab, std::span<const double> dW,
                PathBuffers& buf, std::size_t path) {
    const std::size_t n = dW.size();
    const double dt = tab.dt;
    double r = params.r0;
    double u = 0.0;
    double acc = 0.0;
    buf.r[0] = r;
    buf.u[0] = u;
    buf.int_r[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r_next =
            r + (params.a - params.b * r - tab.memory_drift[k] * u) * dt + params.sigma * dW[k];
        const double u_next = u + tab.u_vol[k] * dW[k];
        acc += 0.5 * (r + r_next) * dt;
        r = r_next;
        u = u_next;
        if (!std::isfinite(r) || !std::isfinite(u)) {
            blow_up(path, k + 1);
        }
        buf.r[k + 1] = r;
        buf.u[k + 1] = u;
        buf.int_r[k + 1] = acc;
    }
}

void exact_path(const ModelParams& params, const StepTable& tab, PathRng& rng, PathBuffers& buf,
                std::size_t path) {
    const std::size_t n = tab.exact.size();
    double r = params.r0;
    double u = 0.0;
    double acc = 0.0;
    buf.r[0] = r;
    buf.u[0] = u;
    buf.int_r[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& e = tab.exact[k];
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        const double r_next = e.tr.mean_r(r, u) + e.l11 * z1;
        const double u_next = u + e.l21 * z1 + e.l22 * z2;
        acc += 0.5 * (r + r_next) * (tab.times[k + 1] - tab.times[k]);
        r = r_next;
        u = u_next;
        if (!std::isfinite(r) || !std::isfinite(u)) {
            blow_up(path, k + 1);
        }
        buf.r[k + 1] = r;
        buf.u[k + 1] = u;
        buf.int_r[k + 1] = acc;
    }
}

PathView view_of(const StepTable& tab, const PathBuffers& buf, bool with_increments) {
    return PathView{tab.times, buf.r, buf.u, buf.int_r,
                    with_increments ? std::span<const double>(buf.dW) : std::span<const double>()};
}

unsigned worker_count(const SimConfig& cfg) {
    unsigned n = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
    n = std::max(n, 1u);
    return static_cast<unsigned>(std::min<std::size_t>(n, cfg.n_paths));
}

} // namespace

void for_each_path(const ModelParams& params, const SimConfig& cfg, const PathObserver& observer) {
    params.validate();
    cfg.validate();
    const StepTable tab = make_table(params, cfg.horizon, cfg.n_steps, cfg.scheme);
    const double sqrt_dt = std::sqrt(tab.dt);

    const auto run_range = [&](std::size_t begin, std::size_t end) {
        PathBuffers buf(cfg.n_steps);
        for (std::size_t path = begin; path < end; ++path) {
            PathRng rng(cfg.seed, path);
            if (cfg.scheme == Scheme::euler) {
                for (auto& w : buf.dW) {
                    w = sqrt_dt * rng.normal();
                }
                euler_path(params, tab, buf.dW, buf, path);
                observer(path, view_of(tab, buf, true));
            } else {
                exact_path(params, tab, rng, buf, path);
                observer(path, view_of(tab, buf, false));
            }
        }
    };

    const unsigned workers = worker_count(cfg);
    if (workers == 1) {
        run_range(0, cfg.n_paths);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (cfg.n_paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(cfg.n_paths, w * chunk);
        const std::size_t end = std::min(cfg.n_paths, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                run_range(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

namespace {

PathSet allocate_paths(std::vector<double> times, std::size_t n_paths, std::uint64_t seed) {
    const std::size_t total = 3 * n_paths * times.size();
    if (total > kMaxStoredValues) {
        throw InputError("simulate: path set too large to store; use the streaming estimators");
    }
    PathSet out;
    out.times = std::move(times);
    out.n_paths = n_paths;
    out.seed = seed;
    out.r.resize(n_paths * out.times.size());
    out.u.resize(n_paths * out.times.size());
    out.int_r.resize(n_paths * out.times.size());
    return out;
}

void store_path(PathSet& out, std::size_t path, const PathView& view) {
    const std::size_t off = path * out.n_points();
    std::copy(view.r.begin(), view.r.end(), out.r.begin() + static_cast<std::ptrdiff_t>(off));
    std::copy(view.u.begin(), view.u.end(), out.u.begin() + static_cast<std::ptrdiff_t>(off));
    std::copy(view.int_r.begin(), view.int_r.end(),
              out.int_r.begin() + static_cast<std::ptrdiff_t>(off));
}

} // namespace

PathSet simulate(const ModelParams& params, const SimConfig& cfg) {
    cfg.validate();
    std::vector<double> times(cfg.n_steps + 1);
    const double dt = cfg.horizon / static_cast<double>(cfg.n_steps);
    for (std::size_t k = 0; k <= cfg.n_steps; ++k) {
        times[k] = static_cast<double>(k) * dt;
    }
    times.back() = cfg.horizon;
    PathSet out = allocate_paths(std::move(times), cfg.n_paths, cfg.seed);
    for_each_path(params, cfg, [&](std::size_t path, const PathView& view) {
        store_path(out, path, view);
    });
    return out;
}

PathSet simulate_with_increments(const ModelParams& params, double horizon, std::size_t n_steps,
                                 std::span<const double> dW) {
    params.validate();
    if (!(horizon > 0.0) || n_steps < 1 || dW.empty() || dW.size() % n_steps != 0) {
        throw InputError("simulate_with_increments: dW must hold whole rows of n_steps increments");
    }
    const StepTable tab = make_table(params, horizon, n_steps, Scheme::euler);
    const std::size_t n_paths = dW.size() / n_steps;
    PathSet out = allocate_paths(tab.times, n_paths, 0);
    PathBuffers buf(n_steps);
    for (std::size_t path = 0; path < n_paths; ++path) {
        euler_path(params, tab, dW.subspan(path * n_steps, n_steps), buf, path);
        store_path(out, path, view_of(tab, buf, false));
    }
    return out;
}

namespace {

McEstimate reduce(const std::vector<double>& samples) {
    // Sequential in path order so the result is independent of worker count.
    const auto n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    const double var = samples.size() > 1 ? ss / (n - 1.0) : 0.0;
    return McEstimate{mean, std::sqrt(var / n), samples.size()};
}

void check_horizon(double maturity, const SimConfig& cfg, const char* where) {
    if (std::fabs(maturity - cfg.horizon) > 1e-12 * std::max(1.0, maturity)) {
        throw InputError(std::string(where) + ": simulation horizon must equal the maturity");
    }
}

} // namespace

McEstimate mc_bond_price(const ModelParams& params, double T, const SimConfig& cfg) {
    return mc_claim_price(params, T, [](double, double) { return 1.0; }, cfg);
}

McEstimate mc_claim_price(const ModelParams& params, double S, const Payoff& payoff,
                          const SimConfig& cfg) {
    check_horizon(S, cfg, "mc_claim_price");
    std::vector<double> samples(cfg.n_paths);
    for_each_path(params, cfg, [&](std::size_t path, const PathView& view) {
        samples[path] = std::exp(-view.int_r.back()) * payoff(view.r.back(), view.u.back());
    });
    return reduce(samples);
}

double u_representation_residual(const ModelParams& params, const PathView& path) {
    params.validate();
    const std::size_t n = path.dW.size();
    if (n == 0 || path.times.size() != n + 1 || path.u.size() != n + 1) {
        throw InputError("u_representation_residual: path must carry its Brownian increments");
    }
    const double p = params.p, q = params.q;
    const double k = p / (p + 2.0 * q);
    double sum = 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = path.times[i];
        const double dt = path.times[i + 1] - s;
        const double g = std::exp(q * s) - k * std::exp(-q * s);
        const double dZ = path.dW[i] - p * std::exp(-(p + q) * s) * path.u[i] * dt;
        sum += g * dZ;
        const double t = path.times[i + 1];
        const double closed =
            std::exp(-p * t) / l_fn(t, params) * (1.0 - k * std::exp(-2.0 * q * t)) * path.u[i + 1];
        worst = std::max(worst, std::fabs(sum - closed));
    }
    return worst;
}

void write_paths_csv(const PathSet& paths, std::ostream& out) {
    out << "t,path_id,r,u,int_r\n";
    const auto old_precision = out.precision(17);
    for (std::size_t path = 0; path < paths.n_paths; ++path) {
        for (std::size_t k = 0; k < paths.n_points(); ++k) {
            out << paths.times[k] << ',' << path << ',' << paths.r_at(path, k) << ','
                << paths.u_at(path, k) << ',' << paths.int_r_at(path, k) << '\n';
        }
    }
    out.precision(old_precision);
}

} // namespace mvasicek::sim
