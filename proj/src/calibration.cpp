#include "mvasicek/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mvasicek/numerics.hpp"

namespace mvasicek::calib {

void validate_quotes(std::span<const YieldQuote> quotes) {
    if (quotes.empty()) {
        throw InputError("quotes: empty quote set");
    }
    for (const auto& q : quotes) {
        if (!(q.maturity > 0.0) || !std::isfinite(q.maturity)) {
            throw InputError("quotes: maturity must be positive");
        }
        if (!(q.yield > -0.05) || !std::isfinite(q.yield)) {
            throw InputError("quotes: yield below the -5% sanity floor");
        }
    }
}

QuoteSet model_quotes(const ModelParams& params, std::span<const double> maturities) {
    QuoteSet out;
    out.reserve(maturities.size());
    for (double T : maturities) {
        out.push_back({T, yield_at(T, params)});
    }
    return out;
}

double objective(const ModelParams& params, std::span<const YieldQuote> quotes) {
    if (!params.valid()) {
        return std::numeric_limits<double>::infinity();
    }
    double sse = 0.0;
    for (const auto& q : quotes) {
        const double diff = q.yield - yield_at(q.maturity, params);
        sse += diff * diff;
    }
    return std::isfinite(sse) ? sse : std::numeric_limits<double>::infinity();
}

ModelParams from_coords(const Coords& z) {
    ModelParams m;
    m.a = std::exp(z[0]);
    m.b = std::exp(z[1]);
    m.sigma = std::exp(z[2]);
    m.q = std::exp(z[4]);
    m.p = -m.q + std::exp(z[3]);
    m.r0 = std::exp(z[5]);
    return m;
}

Coords to_coords(const ModelParams& params) {
    params.validate();
    constexpr double kTiny = 1e-12;
    return Coords{std::log(params.a),
                  std::log(params.b),
                  std::log(params.sigma),
                  std::log(params.p + params.q),
                  std::log(params.q),
                  std::log(std::max(params.r0, kTiny))};
}

ModelParams default_initial_guess(std::span<const YieldQuote> quotes) {
    validate_quotes(quotes);
    const auto [shortest, longest] = std::minmax_element(
        quotes.begin(), quotes.end(),
        [](const YieldQuote& x, const YieldQuote& y) { return x.maturity < y.maturity; });
    constexpr double kFloor = 1e-4;
    ModelParams m;
    m.b = 1.5;
    m.a = m.b * std::max(longest->yield, kFloor);
    m.sigma = 0.3;
    m.p = 0.05;
    m.q = 0.1;
    m.r0 = std::max(shortest->yield, kFloor);
    return m;
}

namespace {

// Free coordinates of the search. With p pinned to zero the p coordinate
// is dropped and p = 0 is imposed directly.
class Parameterisation {
public:
    explicit Parameterisation(bool fix_p_zero) : fix_p_zero_(fix_p_zero) {}

    std::size_t dims() const { return fix_p_zero_ ? 5 : 6; }

    std::vector<double> encode(const ModelParams& params) const {
        const Coords z = to_coords(params);
        if (!fix_p_zero_) return {z.begin(), z.end()};
        return {z[0], z[1], z[2], z[4], z[5]};
    }

    ModelParams decode(std::span<const double> x) const {
        if (!fix_p_zero_) {
            Coords z{};
            std::copy(x.begin(), x.end(), z.begin());
            return from_coords(z);
        }
        Coords z{x[0], x[1], x[2], x[3], x[3], x[4]}; // p + q = q
        ModelParams m = from_coords(z);
        m.p = 0.0;
        return m;
    }

private:
    bool fix_p_zero_;
};

struct Run {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
};

} // namespace

CalibrationResult calibrate(std::span<const YieldQuote> quotes, const CalibrationOptions& options) {
    validate_quotes(quotes);
    const Parameterisation param(options.fix_p_zero);
    const std::size_t n = param.dims();

    ModelParams init = options.init.value_or(default_initial_guess(quotes));
    if (options.fix_p_zero) init.p = 0.0;
    init.validate();
    const std::vector<double> x_init = param.encode(init);

    const numerics::Objective f = [&](std::span<const double> x) {
        return objective(param.decode(x), quotes);
    };

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Repeated Nelder-Mead from the incumbent with a fresh simplex until the
    // objective stops improving; counters the premature collapse of the simplex.
    const auto polish = [&](std::vector<std::vector<double>> simplex) {
        Run run;
        for (std::size_t pass = 0; pass < 12; ++pass) {
            auto res = numerics::nelder_mead(f, std::move(simplex), options.tol_f, options.tol_x,
                                             options.max_iter);
            run.iterations += res.iterations;
            const double previous = run.f;
            if (res.f_best <= run.f) {
                run.f = res.f_best;
                run.x = res.x_best;
                run.converged = res.converged;
            }
            const bool stalled = std::isfinite(previous) &&
                                 previous - run.f <= 1e-6 * previous + options.tol_f;
            if (stalled || run.f == 0.0) break;
            simplex.assign(n + 1, run.x);
            for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += 0.05;
        }
        return run;
    };

    Run best;
    const std::size_t restarts = std::max<std::size_t>(options.n_restarts, 1);
    for (std::size_t k = 0; k < restarts; ++k) {
        std::vector<std::vector<double>> simplex(n + 1, x_init);
        if (k == 0) {
            for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += 0.1;
        } else {
            for (auto& v : simplex[0]) v += options.restart_spread * normal(rng);
            for (std::size_t j = 1; j <= n; ++j) {
                simplex[j] = simplex[0];
                for (auto& v : simplex[j]) v += options.restart_spread * normal(rng);
            }
        }
        Run run = polish(std::move(simplex));
        // Strict improvement keeps the earliest restart on ties.
        if (run.f < best.f || best.x.empty()) {
            best = std::move(run);
        }
    }

    CalibrationResult out;
    out.params = param.decode(best.x);
    out.iterations = best.iterations;
    out.converged = best.converged && std::isfinite(best.f);
    out.restarts_used = restarts;
    out.underdetermined = quotes.size() < n;
    out.residuals.reserve(quotes.size());
    double sse = 0.0;
    for (const auto& q : quotes) {
        const double r = yield_at(q.maturity, out.params) - q.yield;
        out.residuals.push_back(r);
        sse += r * r;
    }
    out.sse = sse;
    return out;
}

} // namespace mvasicek::calib
