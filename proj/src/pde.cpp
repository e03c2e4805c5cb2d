#include "mvasicek/pde.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "mvasicek/numerics.hpp"

namespace mvasicek::pde {

PdeGrid PdeGrid::uniform(double x_lo, double x_hi, std::size_t nx, double y_lo, double y_hi,
                         std::size_t ny, std::size_t n_time, double S) {
    if (nx < 3 || ny < 3 || !(x_hi > x_lo) || !(y_hi > y_lo)) {
        throw InputError("pde grid: need at least 3 nodes per axis and a non-empty range");
    }
    PdeGrid g;
    g.x_nodes.resize(nx);
    g.y_nodes.resize(ny);
    for (std::size_t i = 0; i < nx; ++i) {
        g.x_nodes[i] = x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(nx - 1);
    }
    for (std::size_t j = 0; j < ny; ++j) {
        g.y_nodes[j] = y_lo + (y_hi - y_lo) * static_cast<double>(j) / static_cast<double>(ny - 1);
    }
    g.n_time = n_time;
    g.S = S;
    g.validate();
    return g;
}

void PdeGrid::validate() const {
    if (nx() < 3 || ny() < 3) {
        throw InputError("pde grid: need at least 3 nodes per axis");
    }
    if (n_time < 1) {
        throw InputError("pde grid: n_time must be >= 1");
    }
    if (!(S > 0.0)) {
        throw InputError("pde grid: terminal time must be positive");
    }
    const auto check_axis = [](const std::vector<double>& v, const char* name) {
        const double h = (v.back() - v.front()) / static_cast<double>(v.size() - 1);
        for (std::size_t k = 1; k < v.size(); ++k) {
            const double step = v[k] - v[k - 1];
            if (!(step > 0.0) || std::fabs(step - h) > 1e-9 * std::max(1.0, std::fabs(h))) {
                throw InputError(std::string("pde grid: ") + name +
                                 " nodes must be strictly increasing and uniform");
            }
        }
    };
    check_axis(x_nodes, "x");
    check_axis(y_nodes, "y");
}

PdeGrid default_grid(const ModelParams& params, double S, const GridOptions& options) {
    params.validate();
    if (!(S > 0.0)) {
        throw InputError("default_grid: S must be positive");
    }
    const GaussianTransition tr = gaussian_transition(0.0, S, params);
    const double mean_r = tr.mean_r(params.r0, 0.0);
    const double half_x = std::max(options.width_sd * std::sqrt(tr.var_r), options.min_half_width);
    const double half_y = std::max(options.width_sd * std::sqrt(tr.var_u), options.min_half_width);
    double x_lo = std::min(mean_r, params.r0) - half_x;
    double x_hi = std::max(mean_r, params.r0) + half_x;
    for (double x : options.x_include) {
        x_lo = std::min(x_lo, x - options.min_half_width);
        x_hi = std::max(x_hi, x + options.min_half_width);
    }
    return PdeGrid::uniform(x_lo, x_hi, options.nx, -half_y, half_y, options.ny, options.n_time, S);
}

namespace {

struct Field {
    std::size_t nx;
    std::size_t ny;
    std::vector<double> v;

    Field(std::size_t nx_, std::size_t ny_) : nx(nx_), ny(ny_), v(nx_ * ny_, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return v[i * ny + j]; }
    double operator()(std::size_t i, std::size_t j) const { return v[i * ny + j]; }
};

// First difference along an axis: central inside, one-sided on the edges
// (the one-sided form equals the central one with a linearly extrapolated ghost).
template <typename Get>
double first_diff(Get&& get, std::size_t k, std::size_t n, double h) {
    if (k == 0) return (get(1) - get(0)) / h;
    if (k == n - 1) return (get(n - 1) - get(n - 2)) / h;
    return (get(k + 1) - get(k - 1)) / (2.0 * h);
}

template <typename Get>
double second_diff(Get&& get, std::size_t k, std::size_t n, double h) {
    if (k == 0 || k == n - 1) return 0.0;
    return (get(k + 1) - 2.0 * get(k) + get(k - 1)) / (h * h);
}

struct Coefficients {
    double half_sigma_sq;   // sigma^2 / 2
    double half_u_var;      // h(t)^2 / 2
    double cross;           // sigma h(t)
    double memory_drift;    // p sigma e^{-(p+q)t}
};

Coefficients coefficients_at(double t, const ModelParams& params) {
    const double h = u_diffusion(t, params);
    return Coefficients{0.5 * params.sigma * params.sigma, 0.5 * h * h, params.sigma * h,
                        params.p * params.sigma * std::exp(-(params.p + params.q) * t)};
}

// A1 U: x-diffusion, x-drift and half the discounting.
void apply_x(const Field& U, const PdeGrid& g, const ModelParams& params, const Coefficients& c,
             double dx, Field& out) {
    for (std::size_t i = 0; i < U.nx; ++i) {
        const double x = g.x_nodes[i];
        for (std::size_t j = 0; j < U.ny; ++j) {
            const auto get = [&](std::size_t k) { return U(k, j); };
            const double mu = params.a - params.b * x - c.memory_drift * g.y_nodes[j];
            out(i, j) = c.half_sigma_sq * second_diff(get, i, U.nx, dx) +
                        mu * first_diff(get, i, U.nx, dx) - 0.5 * x * U(i, j);
        }
    }
}

// A2 U: y-diffusion and the other half of the discounting.
void apply_y(const Field& U, const PdeGrid& g, const Coefficients& c, double dy, Field& out) {
    for (std::size_t i = 0; i < U.nx; ++i) {
        const double x = g.x_nodes[i];
        for (std::size_t j = 0; j < U.ny; ++j) {
            const auto get = [&](std::size_t k) { return U(i, k); };
            out(i, j) = c.half_u_var * second_diff(get, j, U.ny, dy) - 0.5 * x * U(i, j);
        }
    }
}

// A0 U: mixed derivative, d/dx of d/dy.
void apply_mixed(const Field& U, const Coefficients& c, double dx, double dy, Field& scratch,
                 Field& out) {
    for (std::size_t i = 0; i < U.nx; ++i) {
        for (std::size_t j = 0; j < U.ny; ++j) {
            scratch(i, j) = first_diff([&](std::size_t k) { return U(i, k); }, j, U.ny, dy);
        }
    }
    for (std::size_t i = 0; i < U.nx; ++i) {
        for (std::size_t j = 0; j < U.ny; ++j) {
            out(i, j) = c.cross *
                        first_diff([&](std::size_t k) { return scratch(k, j); }, i, U.nx, dx);
        }
    }
}

[[noreturn]] void diverged(std::size_t step, double max_abs) {
    std::ostringstream msg;
    msg << "pde solve: divergence at time step " << step << " (max|G| = " << max_abs << ")";
    throw NumericalError(msg.str());
}

} // namespace

PdeSolution solve(const ModelParams& params, double S, const Terminal& terminal,
                  const PdeGrid& grid) {
    params.validate();
    grid.validate();
    if (std::fabs(S - grid.S) > 1e-12 * std::max(1.0, S)) {
        throw InputError("pde solve: grid terminal time does not match S");
    }
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    const double dx = grid.x_nodes[1] - grid.x_nodes[0];
    const double dy = grid.y_nodes[1] - grid.y_nodes[0];
    const double dt = S / static_cast<double>(grid.n_time);
    constexpr double theta = 0.5;

    Field U(nx, ny);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const double g = terminal(grid.x_nodes[i], grid.y_nodes[j]);
            if (!std::isfinite(g)) {
                throw InputError("pde solve: terminal value is not finite on the grid");
            }
            U(i, j) = g;
        }
    }

    Field a0(nx, ny), a1(nx, ny), a2(nx, ny), scratch(nx, ny), Y(nx, ny);
    std::vector<double> sub, diag, sup, rhs, sol, work;
    PdeDiagnostics diag_out;

    const double max_abs_x = std::max(std::fabs(grid.x_nodes.front()), std::fabs(grid.x_nodes.back()));
    const double max_abs_y = std::max(std::fabs(grid.y_nodes.front()), std::fabs(grid.y_nodes.back()));

    for (std::size_t step = 0; step < grid.n_time; ++step) {
        // Backward in calendar time: this step covers [S - (step+1) dt, S - step dt].
        const double t_mid = S - (static_cast<double>(step) + 0.5) * dt;
        const Coefficients c = coefficients_at(t_mid, params);

        const double max_drift = std::fabs(params.a) + params.b * max_abs_x +
                                 std::fabs(c.memory_drift) * max_abs_y;
        diag_out.max_courant = std::max({diag_out.max_courant, dt * 2.0 * c.half_sigma_sq / (dx * dx),
                                         dt * 2.0 * c.half_u_var / (dy * dy), dt * max_drift / dx});

        apply_mixed(U, c, dx, dy, scratch, a0);
        apply_x(U, grid, params, c, dx, a1);
        apply_y(U, grid, c, dy, a2);

        for (std::size_t k = 0; k < U.v.size(); ++k) {
            Y.v[k] = U.v[k] + dt * (a0.v[k] + a1.v[k] + a2.v[k]) - theta * dt * a1.v[k];
        }

        // x sweeps: (I - theta dt A1) Y1 = Y0 - theta dt A1 U, one system per y node.
        sub.assign(nx - 1, 0.0);
        sup.assign(nx - 1, 0.0);
        diag.assign(nx, 0.0);
        rhs.assign(nx, 0.0);
        sol.assign(nx, 0.0);
        work.assign(std::max(nx, ny), 0.0);
        const double w = theta * dt;
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 0; i < nx; ++i) {
                const double x = grid.x_nodes[i];
                const double mu = params.a - params.b * x - c.memory_drift * grid.y_nodes[j];
                double lo = 0.0, mid = -0.5 * x, up = 0.0;
                if (i == 0) {
                    mid += -mu / dx;
                    up = mu / dx;
                } else if (i == nx - 1) {
                    lo = -mu / dx;
                    mid += mu / dx;
                } else {
                    const double d2 = c.half_sigma_sq / (dx * dx);
                    const double d1 = mu / (2.0 * dx);
                    lo = d2 - d1;
                    mid += -2.0 * d2;
                    up = d2 + d1;
                }
                diag[i] = 1.0 - w * mid;
                if (i > 0) sub[i - 1] = -w * lo;
                if (i + 1 < nx) sup[i] = -w * up;
                rhs[i] = Y(i, j);
            }
            numerics::solve_tridiagonal_into(sub, diag, sup, rhs, std::span(work).first(nx), sol);
            for (std::size_t i = 0; i < nx; ++i) {
                Y(i, j) = sol[i];
            }
        }

        // y sweeps: (I - theta dt A2) Y2 = Y1 - theta dt A2 U, one system per x node.
        sub.assign(ny - 1, 0.0);
        sup.assign(ny - 1, 0.0);
        diag.assign(ny, 0.0);
        rhs.assign(ny, 0.0);
        sol.assign(ny, 0.0);
        const double d2 = c.half_u_var / (dy * dy);
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = grid.x_nodes[i];
            for (std::size_t j = 0; j < ny; ++j) {
                const bool edge = (j == 0 || j == ny - 1);
                const double mid = -0.5 * x - (edge ? 0.0 : 2.0 * d2);
                diag[j] = 1.0 - w * mid;
                if (j > 0) sub[j - 1] = edge ? 0.0 : -w * d2;
                if (j + 1 < ny) sup[j] = edge ? 0.0 : -w * d2;
                rhs[j] = Y(i, j) - w * a2(i, j);
            }
            numerics::solve_tridiagonal_into(sub, diag, sup, rhs, std::span(work).first(ny), sol);
            for (std::size_t j = 0; j < ny; ++j) {
                U(i, j) = sol[j];
            }
        }

        double max_abs = 0.0;
        for (double v : U.v) {
            max_abs = std::max(max_abs, std::fabs(v));
        }
        if (!std::isfinite(max_abs) || max_abs > 1e100) {
            diverged(step + 1, max_abs);
        }
    }

    for (std::size_t j = 0; j < ny; ++j) {
        diag_out.boundary_flux = std::max({diag_out.boundary_flux, std::fabs(U(1, j) - U(0, j)),
                                           std::fabs(U(nx - 1, j) - U(nx - 2, j))});
    }
    for (std::size_t i = 0; i < nx; ++i) {
        diag_out.boundary_flux = std::max({diag_out.boundary_flux, std::fabs(U(i, 1) - U(i, 0)),
                                           std::fabs(U(i, ny - 1) - U(i, ny - 2))});
    }

    return PdeSolution{std::move(U.v), grid, diag_out};
}

double value_at(const PdeSolution& solution, double r, double u) {
    const auto& g = solution.grid;
    if (!(r >= g.x_nodes.front() && r <= g.x_nodes.back() && u >= g.y_nodes.front() &&
          u <= g.y_nodes.back())) {
        throw InputError("value_at: query point lies outside the grid");
    }
    const double dx = g.x_nodes[1] - g.x_nodes[0];
    const double dy = g.y_nodes[1] - g.y_nodes[0];
    const auto locate = [](double v, double lo, double h, std::size_t n) {
        const double pos = (v - lo) / h;
        auto k = static_cast<std::size_t>(std::floor(pos));
        k = std::min(k, n - 2);
        return std::pair{k, std::clamp(pos - static_cast<double>(k), 0.0, 1.0)};
    };
    const auto [i, fx] = locate(r, g.x_nodes.front(), dx, g.nx());
    const auto [j, fy] = locate(u, g.y_nodes.front(), dy, g.ny());
    const double v00 = solution.node(i, j);
    const double v10 = solution.node(i + 1, j);
    const double v01 = solution.node(i, j + 1);
    const double v11 = solution.node(i + 1, j + 1);
    if (fx == 0.0 && fy == 0.0) {
        return v00;
    }
    return (1.0 - fx) * ((1.0 - fy) * v00 + fy * v01) + fx * ((1.0 - fy) * v10 + fy * v11);
}

void write_surface_csv(const PdeSolution& solution, std::ostream& out) {
    out << "x,y,G\n";
    const auto old_precision = out.precision(17);
    for (std::size_t i = 0; i < solution.grid.nx(); ++i) {
        for (std::size_t j = 0; j < solution.grid.ny(); ++j) {
            out << solution.grid.x_nodes[i] << ',' << solution.grid.y_nodes[j] << ','
                << solution.node(i, j) << '\n';
        }
    }
    out.precision(old_precision);
}

} // namespace mvasicek::pde
