#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mvasicek/errors.hpp"

namespace mvasicek::numerics {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0; // absolute
    std::size_t evaluations = 0;
};

/// Quadrature did not reach the requested tolerance within the panel budget.
/// Carries the best estimate obtained so far.
class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, QuadResult best)
        : NumericalError(what), best_(best) {}
    const QuadResult& best() const noexcept { return best_; }

private:
    QuadResult best_;
};

inline constexpr double kDefaultAbsTol = 1e-12;
inline constexpr double kDefaultRelTol = 1e-10;
inline constexpr std::size_t kMaxPanels = std::size_t{1} << 14;

/// Globally adaptive Gauss-Kronrod (7/15) quadrature with panel bisection.
/// Stops when the summed error estimate is below max(abs_tol, rel_tol*|value|).
/// Throws QuadratureError after kMaxPanels panels, InputError on lo > hi or
/// abs_tol <= 0, and NumericalError naming the abscissa if f returns NaN.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                              double abs_tol = kDefaultAbsTol, double rel_tol = kDefaultRelTol);

/// Convenience wrapper returning only the value.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double abs_tol = kDefaultAbsTol, double rel_tol = kDefaultRelTol);

/// Standard normal CDF via erfc.
double norm_cdf(double x) noexcept;

/// Thomas algorithm. `sub` and `sup` have n-1 entries, `diag` and `rhs` n.
/// Throws NumericalError with the row index on a zero pivot.
std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> sup, std::span<const double> rhs);

/// In-place variant used by the ADI sweeps; `scratch` must hold n doubles.
/// On return `x` holds the solution.
void solve_tridiagonal_into(std::span<const double> sub, std::span<const double> diag,
                            std::span<const double> sup, std::span<const double> rhs,
                            std::span<double> scratch, std::span<double> x);

struct OptimResult {
    std::vector<double> x_best;
    double f_best = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double simplex_diameter = 0.0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead with the standard coefficients (1, 2, 1/2, 1/2).
/// The initial simplex is x0 plus x0 + step0[i]*e_i. NaN objective values
/// are treated as +inf. Converges when the f-spread over the simplex is
/// below tol_f or its diameter (max vertex distance from the best) is below tol_x.
OptimResult nelder_mead(const Objective& objective, std::span<const double> x0,
                        std::span<const double> step0, double tol_f, double tol_x,
                        std::size_t max_iter);

/// Same algorithm started from an explicit simplex of n+1 vertices.
OptimResult nelder_mead(const Objective& objective, std::vector<std::vector<double>> simplex,
                        double tol_f, double tol_x, std::size_t max_iter);

} // namespace mvasicek::numerics
