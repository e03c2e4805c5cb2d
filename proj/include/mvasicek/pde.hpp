#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mvasicek/model.hpp"

namespace mvasicek::pde {

/// Uniform rectangular grid on the (x = r, y = u) state plane plus the
/// number of backward time steps from S to 0.
struct PdeGrid {
    std::vector<double> x_nodes;
    std::vector<double> y_nodes;
    std::size_t n_time = 400;
    double S = 1.0;

    static PdeGrid uniform(double x_lo, double x_hi, std::size_t nx, double y_lo, double y_hi,
                           std::size_t ny, std::size_t n_time, double S);
    std::size_t nx() const { return x_nodes.size(); }
    std::size_t ny() const { return y_nodes.size(); }
    void validate() const;
};

struct GridOptions {
    double width_sd = 6.0;
    std::size_t nx = 201;
    std::size_t ny = 201;
    std::size_t n_time = 400;
    /// Smallest half-width of the x range, used when the rate variance vanishes.
    double min_half_width = 0.01;
    /// Extra short-rate values the x range must contain (e.g. an r0 sweep).
    std::vector<double> x_include;
};

/// Grid spanning width_sd standard deviations of r(S) and u(S) under the
/// model, always containing (r0, 0) and every value in options.x_include.
PdeGrid default_grid(const ModelParams& params, double S, const GridOptions& options = {});

struct PdeDiagnostics {
    /// Largest of dt*sigma^2/dx^2, dt*h(t)^2/dy^2 and dt*|drift|/dx over the run.
    double max_courant = 0.0;
    /// Largest |normal difference| across the four edges of the t = 0 surface.
    double boundary_flux = 0.0;
};

/// G(0, x_i, y_j) stored x-major: surface[i * ny + j].
struct PdeSolution {
    std::vector<double> surface;
    PdeGrid grid;
    PdeDiagnostics diagnostics;

    double node(std::size_t i, std::size_t j) const { return surface[i * grid.ny() + j]; }
};

using Terminal = std::function<double(double x, double y)>;

/// Solves dG/dt + L G = 0 on [0, S) with G(S, x, y) = terminal(x, y) by
/// Douglas ADI (theta = 1/2) with the mixed derivative treated explicitly.
/// Edges use zero normal second derivative.
PdeSolution solve(const ModelParams& params, double S, const Terminal& terminal,
                  const PdeGrid& grid);

/// Bilinear interpolation of the t = 0 surface. Throws InputError outside the grid.
double value_at(const PdeSolution& solution, double r, double u);

/// CSV with header `x,y,G`.
void write_surface_csv(const PdeSolution& solution, std::ostream& out);

} // namespace mvasicek::pde
