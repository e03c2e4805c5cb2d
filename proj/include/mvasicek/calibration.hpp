#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mvasicek/model.hpp"

namespace mvasicek::calib {

struct YieldQuote {
    double maturity = 0.0; // years
    double yield = 0.0;    // continuously compounded, decimal
};

using QuoteSet = std::vector<YieldQuote>;

/// Throws InputError if a quote breaks maturity > 0 or yield > -0.05, or the set is empty.
void validate_quotes(std::span<const YieldQuote> quotes);

/// Maturities used for the published Treasury fits: 1m, 3m, 6m, 1y, 2y, 3y, 5y, 7y, 10y, 20y.
inline constexpr std::array<double, 10> kTreasuryMaturities = {
    1.0 / 12.0, 3.0 / 12.0, 6.0 / 12.0, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 20.0};

/// Model yields Y(0, T_i) at the given maturities.
QuoteSet model_quotes(const ModelParams& params, std::span<const double> maturities);

/// Sum of squared yield errors. Returns +inf for invalid parameters.
double objective(const ModelParams& params, std::span<const YieldQuote> quotes);

/// Unconstrained coordinates: a = e^x0, b = e^x1, sigma = e^x2, q = e^x4,
/// p = -q + e^x3, r0 = e^x5. Every point of R^6 maps to a valid ModelParams.
using Coords = std::array<double, 6>;
ModelParams from_coords(const Coords& z);
/// Inverse of from_coords. r0 = 0 is mapped to a tiny positive value.
Coords to_coords(const ModelParams& params);

struct CalibrationOptions {
    std::optional<ModelParams> init; // default: derived from the quotes
    std::size_t n_restarts = 20;
    std::uint64_t seed = 0;
    bool fix_p_zero = false;        // classical Vasicek restriction
    std::size_t max_iter = 4000;    // per Nelder-Mead run
    double tol_f = 1e-22;
    double tol_x = 1e-10;
    double restart_spread = 0.5;    // scale of the randomised initial simplex, in log units
};

struct CalibrationResult {
    ModelParams params;
    double sse = 0.0;
    std::vector<double> residuals; // model - market, per quote
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t restarts_used = 0;
    bool underdetermined = false;  // fewer quotes than free parameters
};

/// Starting point used when none is given: b = 1.5, a = b * long-end yield,
/// sigma = 0.3, p = 0.05, q = 0.1, r0 = shortest-maturity yield.
ModelParams default_initial_guess(std::span<const YieldQuote> quotes);

/// Multi-start Nelder-Mead fit of Y(0, T) to the quotes. Deterministic given the seed.
CalibrationResult calibrate(std::span<const YieldQuote> quotes, const CalibrationOptions& options = {});

} // namespace mvasicek::calib
