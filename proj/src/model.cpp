#include "mvasicek/model.hpp"

#include <cmath>
#include <sstream>

#include "mvasicek/numerics.hpp"

namespace mvasicek {

namespace {

void check_tenor(double t, double T, const char* where) {
    if (!(t >= 0.0) || !(t <= T) || !std::isfinite(T)) {
        std::ostringstream msg;
        msg << where << ": requires 0 <= t <= T (t=" << t << ", T=" << T << ")";
        throw InputError(msg.str());
    }
}

// (1 - e^{-x L}) / x, continuous at x = 0.
double exp_ratio(double x, double L) {
    if (std::fabs(x * L) < 1e-300) {
        return L;
    }
    return -std::expm1(-x * L) / x;
}

double memory_denominator(double t, const ModelParams& params) {
    const double s = params.p + 2.0 * params.q;
    return s * s * std::exp(2.0 * params.q * t) - params.p * params.p;
}

} // namespace

std::string ModelParams::violation() const {
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(a) || !finite(b) || !finite(sigma) || !finite(p) || !finite(q) || !finite(r0)) {
        return "all parameters must be finite";
    }
    if (!(a > 0.0)) return "a must be positive";
    if (!(b > 0.0)) return "b must be positive";
    if (!(sigma > 0.0)) return "sigma must be positive";
    if (!(q > 0.0)) return "q must be positive";
    if (!(p > -q)) return "p must exceed -q";
    if (!(r0 >= 0.0)) return "r0 must be non-negative";
    return {};
}

void ModelParams::validate() const {
    if (auto v = violation(); !v.empty()) {
        throw InputError("invalid model parameters: " + v);
    }
}

double AffineCoefficients::price(double r, double u) const { return std::exp(-A - C * r + D * u); }

double l_fn(double t, const ModelParams& params) {
    const double den = memory_denominator(t, params);
    return 1.0 - 2.0 * params.q * params.p / den;
}

double m_fn(double t, const ModelParams& params) {
    const double p = params.p;
    const double c = params.p + params.q;
    const double b = params.b;
    if (p == 0.0 || t == 0.0) {
        return 0.0;
    }
    const double gap = c - b;
    if (std::fabs(gap) < kConfluenceThreshold) {
        return p / c - p * std::exp(-c * t) / c - p * t * std::exp(-b * t);
    }
    return p / c + b * p * std::exp(-c * t) / (gap * c) - p * std::exp(-b * t) / gap;
}

double u_diffusion(double t, const ModelParams& params) {
    return std::exp((params.p + params.q) * t) * l_fn(t, params);
}

double a_integral_quadrature(double tau, const ModelParams& params) {
    const double b = params.b;
    return numerics::integrate(
        [&](double s) {
            const double g = m_fn(s, params) + std::expm1(-b * s);
            return g * g;
        },
        0.0, tau);
}

double a_integral(double tau, const ModelParams& params) {
    const double b = params.b;
    const double c = params.p + params.q;
    const double p = params.p;
    // Expanded coefficients blow up like p/(c-b) near confluence.
    if (p != 0.0 && std::fabs(c - b) < 1e-2 * std::max(b, c)) {
        return a_integral_quadrature(tau, params);
    }
    // m(s) + e^{-bs} - 1 = alpha + beta e^{-cs} + gamma e^{-bs}
    double alpha = -1.0, beta = 0.0, gamma = 1.0;
    if (p != 0.0) {
        alpha = p / c - 1.0;
        beta = b * p / ((c - b) * c);
        gamma = 1.0 - p / (c - b);
    }
    const auto E = [tau](double k) { return exp_ratio(k, tau); };
    return alpha * alpha * tau + beta * beta * E(2.0 * c) + gamma * gamma * E(2.0 * b) +
           2.0 * alpha * beta * E(c) + 2.0 * alpha * gamma * E(b) + 2.0 * beta * gamma * E(b + c);
}

double c_factor(double t, double T, const ModelParams& params) {
    check_tenor(t, T, "c_factor");
    return exp_ratio(params.b, T - t);
}

double a_factor(double t, double T, const ModelParams& params) {
    check_tenor(t, T, "a_factor");
    const double tau = T - t;
    if (tau == 0.0) {
        return 0.0;
    }
    const double b = params.b;
    const double s2 = params.sigma * params.sigma;
    const double C = exp_ratio(b, tau);

    const double integral = a_integral(tau, params);
    const double m = m_fn(tau, params);
    return params.a / b * (tau - C) - s2 / (2.0 * b * b) * integral -
           s2 * params.q * m * m / (b * b * memory_denominator(t, params));
}

double d_factor(double t, double T, const ModelParams& params) {
    check_tenor(t, T, "d_factor");
    return params.sigma / params.b * std::exp(-(params.p + params.q) * t) * m_fn(T - t, params);
}

AffineCoefficients affine(double t, double T, const ModelParams& params) {
    params.validate();
    return AffineCoefficients{a_factor(t, T, params), c_factor(t, T, params),
                              d_factor(t, T, params), t, T};
}

double bond_price(const ModelState& state, double T, const ModelParams& params) {
    return affine(state.t, T, params).price(state.r, state.u);
}

double bond_price(double T, const ModelParams& params) {
    return bond_price(ModelState::initial(params), T, params);
}

double yield_at(const ModelState& state, double T, const ModelParams& params) {
    if (!(T > state.t)) {
        throw InputError("yield_at: requires t < T");
    }
    const auto k = affine(state.t, T, params);
    return (k.A + k.C * state.r - k.D * state.u) / (T - state.t);
}

double yield_at(double T, const ModelParams& params) {
    return yield_at(ModelState::initial(params), T, params);
}

double discount_vol(double t, double T, const ModelParams& params) {
    check_tenor(t, T, "discount_vol");
    const double tau = T - t;
    return params.sigma / params.b *
           (std::expm1(-params.b * tau) + l_fn(t, params) * m_fn(tau, params));
}

GaussianTransition gaussian_transition(double t, double dt, const ModelParams& params) {
    params.validate();
    if (!(t >= 0.0) || !(dt >= 0.0)) {
        throw InputError("gaussian_transition: requires t >= 0 and dt >= 0");
    }
    const double b = params.b;
    const double c = params.p + params.q;
    const double end = t + dt;

    // Kernel K(s) = int_s^end e^{-b(end-w)} e^{-c w} dw: response of r(end)
    // to a unit of u held from s onwards, through the drift term -sigma p e^{-cw} u.
    const auto kernel = [&](double s) { return std::exp(-c * end) * exp_ratio(b - c, end - s); };
    const auto load_r = [&](double s) {
        return params.sigma * std::exp(-b * (end - s)) -
               params.sigma * params.p * u_diffusion(s, params) * kernel(s);
    };
    const auto load_u = [&](double s) { return u_diffusion(s, params); };

    GaussianTransition tr;
    tr.decay_r = std::exp(-b * dt);
    tr.drift = params.a * exp_ratio(b, dt);
    tr.decay_u = -params.sigma * params.p * kernel(t);
    if (dt > 0.0) {
        tr.var_r = numerics::integrate([&](double s) { return load_r(s) * load_r(s); }, t, end);
        tr.cov_ru = numerics::integrate([&](double s) { return load_r(s) * load_u(s); }, t, end);
        tr.var_u = numerics::integrate([&](double s) { return load_u(s) * load_u(s); }, t, end);
    }
    return tr;
}

} // namespace mvasicek
