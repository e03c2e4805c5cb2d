#pragma once

#include <string>

#include "mvasicek/errors.hpp"

namespace mvasicek {

/// The six scalars of the memory-Vasicek short-rate model
///   dr = (a - b r) dt + sigma dZ,  r(0) = r0,
/// where Z is the Gaussian stationary-increment process with memory
/// parameters (p, q). p = 0 recovers the classical Vasicek model.
struct ModelParams {
    double a = 0.0;     // drift level
    double b = 0.0;     // mean-reversion speed, 1/yr
    double sigma = 0.0; // volatility
    double p = 0.0;     // memory strength
    double q = 0.0;     // memory decay, 1/yr
    double r0 = 0.0;    // initial short rate

    /// Empty string when valid, otherwise a description of the first violated constraint.
    std::string violation() const;
    bool valid() const { return violation().empty(); }
    /// Throws InputError when invalid.
    void validate() const;
};

/// Markov state of the coupled system: short rate r and memory state u at time t.
struct ModelState {
    double t = 0.0;
    double r = 0.0;
    double u = 0.0;

    static ModelState initial(const ModelParams& params) { return {0.0, params.r0, 0.0}; }
};

/// P(t,T) = exp(-A - C r + D u) for fixed (t, T).
struct AffineCoefficients {
    double A = 0.0;
    double C = 0.0;
    double D = 0.0;
    double t = 0.0;
    double T = 0.0;

    double price(double r, double u) const;
};

// Deterministic building blocks. All times in years, rates as decimals.

/// l(t) = 1 - 2qp / ((p+2q)^2 e^{2qt} - p^2).
double l_fn(double t, const ModelParams& params);

/// m(t) = int_0^t p e^{-(p+q)s} (1 - e^{-b(t-s)}) ds in closed form.
/// The confluent formula is used when |p+q-b| < kConfluenceThreshold.
double m_fn(double t, const ModelParams& params);
inline constexpr double kConfluenceThreshold = 1e-9;

/// Diffusion coefficient of u: e^{(p+q)t} l(t).
double u_diffusion(double t, const ModelParams& params);

/// int_0^tau {m(s) + e^{-bs} - 1}^2 ds, the variance integral inside A(t,T).
/// Uses the expanded exponential-sum antiderivative away from p+q = b and
/// adaptive quadrature near it.
double a_integral(double tau, const ModelParams& params);
/// Same integral, always by adaptive quadrature.
double a_integral_quadrature(double tau, const ModelParams& params);

double c_factor(double t, double T, const ModelParams& params);
double a_factor(double t, double T, const ModelParams& params);
double d_factor(double t, double T, const ModelParams& params);
AffineCoefficients affine(double t, double T, const ModelParams& params);

/// Zero-coupon bond price P(t,T) given the Markov state at t.
double bond_price(const ModelState& state, double T, const ModelParams& params);
/// Time-0 bond price with r = r0, u = 0.
double bond_price(double T, const ModelParams& params);

/// Continuously compounded yield Y(t,T); requires t < T.
double yield_at(const ModelState& state, double T, const ModelParams& params);
double yield_at(double T, const ModelParams& params);

/// Volatility v(t,T) of the discounted bond price: dP~ = v P~ dW.
double discount_vol(double t, double T, const ModelParams& params);

/// Exact Gaussian transition of (r, u) from time t to t + dt:
///   r(t+dt) = decay_r * r + decay_u * u + drift + noise_r
///   u(t+dt) = u + noise_u
/// with (noise_r, noise_u) centred Gaussian with the given covariance.
struct GaussianTransition {
    double decay_r = 1.0;
    double decay_u = 0.0;
    double drift = 0.0;
    double var_r = 0.0;
    double cov_ru = 0.0;
    double var_u = 0.0;

    double mean_r(double r, double u) const { return decay_r * r + decay_u * u + drift; }
};

GaussianTransition gaussian_transition(double t, double dt, const ModelParams& params);

} // namespace mvasicek
