#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "mvasicek/model.hpp"

namespace mvasicek::sim {

enum class Scheme { euler, exact_gaussian };

struct SimConfig {
    double horizon = 1.0;
    std::size_t n_steps = 1024;
    std::size_t n_paths = 100000;
    std::uint64_t seed = 42;
    Scheme scheme = Scheme::euler;
    unsigned threads = 0; // 0: hardware concurrency. Results do not depend on it.

    void validate() const;
};

/// Simulated trajectories of (r, u, int_0^t r ds), row-major by path, each
/// row holding n_steps + 1 values starting at t = 0.
struct PathSet {
    std::vector<double> times;
    std::size_t n_paths = 0;
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> int_r;
    std::uint64_t seed = 0;

    std::size_t n_points() const { return times.size(); }
    double r_at(std::size_t path, std::size_t step) const { return r[path * n_points() + step]; }
    double u_at(std::size_t path, std::size_t step) const { return u[path * n_points() + step]; }
    double int_r_at(std::size_t path, std::size_t step) const {
        return int_r[path * n_points() + step];
    }
};

/// One simulated path. `dW` holds the Brownian increments for the Euler
/// scheme and is empty for the exact scheme.
struct PathView {
    std::span<const double> times;
    std::span<const double> r;
    std::span<const double> u;
    std::span<const double> int_r;
    std::span<const double> dW;
};

/// Called once per path. May be invoked concurrently for distinct paths.
using PathObserver = std::function<void(std::size_t path, const PathView&)>;

/// Normal variates for path `path`: a std::mt19937_64 seeded from
/// (seed, path) through std::seed_seq, so every path owns its stream.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path);
    double normal();

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// Streams every path of the configured simulation through `observer`.
void for_each_path(const ModelParams& params, const SimConfig& cfg, const PathObserver& observer);

/// Materialises all paths. Memory is 3 * n_paths * (n_steps+1) doubles;
/// throws InputError above kMaxStoredValues.
PathSet simulate(const ModelParams& params, const SimConfig& cfg);
inline constexpr std::size_t kMaxStoredValues = std::size_t{1} << 26;

/// Euler paths driven by caller-supplied increments `dW` (n_paths rows of
/// n_steps entries each) on a uniform grid over [0, horizon].
PathSet simulate_with_increments(const ModelParams& params, double horizon, std::size_t n_steps,
                                 std::span<const double> dW);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};

/// P(0,T) = E[exp(-int_0^T r ds)]; cfg.horizon must equal T.
McEstimate mc_bond_price(const ModelParams& params, double T, const SimConfig& cfg);

using Payoff = std::function<double(double r, double u)>;

/// E[exp(-int_0^S r ds) g(r(S), u(S))]; cfg.horizon must equal S.
McEstimate mc_claim_price(const ModelParams& params, double S, const Payoff& payoff,
                          const SimConfig& cfg);

/// Largest deviation along an Euler path between the left-point sum of
/// (e^{qs} - k e^{-qs}) dZ, with dZ = dW - p e^{-(p+q)s} u ds and k = p/(p+2q),
/// and its closed form (e^{-pt}/l(t)) (1 - k e^{-2qt}) u(t). Shrinks like
/// O(dt). Requires the path's increments.
double u_representation_residual(const ModelParams& params, const PathView& path);

/// CSV with header `t,path_id,r,u,int_r`.
void write_paths_csv(const PathSet& paths, std::ostream& out);

} // namespace mvasicek::sim
