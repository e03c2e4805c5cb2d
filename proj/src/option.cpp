#include "mvasicek/option.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvasicek/numerics.hpp"

namespace mvasicek {

namespace {
constexpr double kSigmaSqAbsTol = 1e-300;
constexpr double kSigmaSqRelTol = 1e-13;
} // namespace

void OptionSpec::validate() const {
    if (!(S > 0.0) || !(S <= T) || !std::isfinite(T)) {
        throw InputError("option spec: requires 0 < S <= T");
    }
    if (!(K > 0.0) || !std::isfinite(K)) {
        throw InputError("option spec: strike must be positive");
    }
}

double forward_vol(double t, const OptionSpec& spec, const ModelParams& params) {
    if (!(t >= 0.0) || !(t <= spec.S)) {
        throw InputError("forward_vol: requires 0 <= t <= S");
    }
    const double b = params.b;
    const double l = l_fn(t, params);
    // e^{-b(T-t)} - e^{-b(S-t)} written as a difference of expm1 terms
    const double decay = std::expm1(-b * (spec.T - t)) - std::expm1(-b * (spec.S - t));
    return params.sigma / b *
           (decay + l * (m_fn(spec.T - t, params) - m_fn(spec.S - t, params)));
}

double sigma_sq(const OptionSpec& spec, const ModelParams& params) {
    spec.validate();
    params.validate();
    if (spec.S == spec.T) {
        return 0.0;
    }
    // Tight tolerance: call prices inherit the relative error of sigma_sq.
    return numerics::integrate(
        [&](double t) {
            const double v = forward_vol(t, spec, params);
            return v * v;
        },
        0.0, spec.S, kSigmaSqAbsTol, kSigmaSqRelTol);
}

namespace {

OptionQuote quote_common(const OptionSpec& spec, const ModelParams& params) {
    spec.validate();
    params.validate();
    OptionQuote q;
    q.bond_T = bond_price(spec.T, params);
    q.bond_S = bond_price(spec.S, params);
    q.sigma_sq = sigma_sq(spec, params);
    if (q.sigma_sq > 0.0) {
        const double sd = std::sqrt(q.sigma_sq);
        q.d_plus = (std::log(q.bond_T / (spec.K * q.bond_S)) + 0.5 * q.sigma_sq) / sd;
        q.d_minus = q.d_plus - sd;
    } else {
        const double moneyness = q.bond_T - spec.K * q.bond_S;
        const double inf = std::numeric_limits<double>::infinity();
        q.d_plus = q.d_minus = moneyness > 0.0 ? inf : (moneyness < 0.0 ? -inf : 0.0);
    }
    return q;
}

} // namespace

OptionQuote call_quote(const OptionSpec& spec, const ModelParams& params) {
    OptionQuote q = quote_common(spec, params);
    if (q.sigma_sq > 0.0) {
        q.price = q.bond_T * numerics::norm_cdf(q.d_plus) -
                  spec.K * q.bond_S * numerics::norm_cdf(q.d_minus);
    } else {
        q.price = std::max(q.bond_T - spec.K * q.bond_S, 0.0);
    }
    return q;
}

OptionQuote put_quote(const OptionSpec& spec, const ModelParams& params) {
    OptionQuote q = quote_common(spec, params);
    if (q.sigma_sq > 0.0) {
        q.price = spec.K * q.bond_S * numerics::norm_cdf(-q.d_minus) -
                  q.bond_T * numerics::norm_cdf(-q.d_plus);
    } else {
        q.price = std::max(spec.K * q.bond_S - q.bond_T, 0.0);
    }
    return q;
}

double call_price(const OptionSpec& spec, const ModelParams& params) {
    return call_quote(spec, params).price;
}

double put_price(const OptionSpec& spec, const ModelParams& params) {
    return put_quote(spec, params).price;
}

double option_price(const OptionSpec& spec, const ModelParams& params) {
    return spec.kind == OptionKind::call ? call_price(spec, params) : put_price(spec, params);
}

} // namespace mvasicek
