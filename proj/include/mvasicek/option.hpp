#pragma once

#include "mvasicek/model.hpp"

namespace mvasicek {

enum class OptionKind { call, put };

/// European option with expiry S on a zero-coupon bond maturing at T, strike K.
struct OptionSpec {
    double S = 0.0;
    double T = 0.0;
    double K = 0.0;
    OptionKind kind = OptionKind::call;

    void validate() const;
};

/// Full breakdown of a time-0 option price.
struct OptionQuote {
    double price = 0.0;
    double bond_T = 0.0; // P(0,T)
    double bond_S = 0.0; // P(0,S)
    double sigma_sq = 0.0;
    double d_plus = 0.0;
    double d_minus = 0.0;
};

/// v_{S,T}(t) = v(t,T) - v(t,S), for 0 <= t <= S.
double forward_vol(double t, const OptionSpec& spec, const ModelParams& params);

/// Total variance of log(P(S,T)/P(S,S)) under the S-forward measure.
double sigma_sq(const OptionSpec& spec, const ModelParams& params);

OptionQuote call_quote(const OptionSpec& spec, const ModelParams& params);
OptionQuote put_quote(const OptionSpec& spec, const ModelParams& params);

double call_price(const OptionSpec& spec, const ModelParams& params);
double put_price(const OptionSpec& spec, const ModelParams& params);

/// Dispatches on spec.kind.
double option_price(const OptionSpec& spec, const ModelParams& params);

} // namespace mvasicek
