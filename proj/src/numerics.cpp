#include "mvasicek/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace mvasicek::numerics {

namespace {

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights. Odd indices of kXgk are the Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo;
    double hi;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

double checked_eval(const std::function<double(double)>& f, double x) {
    const double y = f(x);
    if (std::isnan(y)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "integrand returned NaN at x = " << x;
        throw NumericalError(msg.str());
    }
    return y;
}

// One GK15 panel with the QUADPACK error heuristic.
Panel gk15(const std::function<double(double)>& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);

    const double fc = checked_eval(f, center);
    double result_k = fc * kWgk[7];
    double result_g = fc * kWg[3];
    double result_abs = std::fabs(result_k);

    std::array<double, 7> f1{};
    std::array<double, 7> f2{};
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = checked_eval(f, center - dx);
        f2[j] = checked_eval(f, center + dx);
        const double sum = f1[j] + f2[j];
        result_k += kWgk[j] * sum;
        result_abs += kWgk[j] * (std::fabs(f1[j]) + std::fabs(f2[j]));
        if (j % 2 == 1) {
            result_g += kWg[j / 2] * sum;
        }
    }

    const double mean = 0.5 * result_k;
    double result_asc = kWgk[7] * std::fabs(fc - mean);
    for (std::size_t j = 0; j < 7; ++j) {
        result_asc += kWgk[j] * (std::fabs(f1[j] - mean) + std::fabs(f2[j] - mean));
    }

    const double abs_half = std::fabs(half);
    result_k *= half;
    result_abs *= abs_half;
    result_asc *= abs_half;

    double err = std::fabs((result_k - half * result_g));
    if (result_asc != 0.0 && err != 0.0) {
        err = result_asc * std::min(1.0, std::pow(200.0 * err / result_asc, 1.5));
    }
    const double eps = std::numeric_limits<double>::epsilon();
    if (result_abs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(50.0 * eps * result_abs, err);
    }
    return Panel{lo, hi, result_k, err};
}

} // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                              double abs_tol, double rel_tol) {
    if (!(lo <= hi)) {
        throw InputError("integrate_adaptive: requires lo <= hi");
    }
    if (!(abs_tol > 0.0)) {
        throw InputError("integrate_adaptive: abs_tol must be positive");
    }
    if (lo == hi) {
        checked_eval(f, lo);
        return QuadResult{0.0, 0.0, 1};
    }

    std::priority_queue<Panel> panels;
    panels.push(gk15(f, lo, hi));
    std::size_t evaluations = 15;
    double total = panels.top().value;
    double total_err = panels.top().error;

    const auto target = [&] { return std::max(abs_tol, rel_tol * std::fabs(total)); };

    while (total_err > target()) {
        if (panels.size() >= kMaxPanels) {
            throw QuadratureError("integrate_adaptive: no convergence within panel budget",
                                  QuadResult{total, total_err, evaluations});
        }
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (mid <= worst.lo || mid >= worst.hi) {
            throw QuadratureError("integrate_adaptive: panel width below machine resolution",
                                  QuadResult{total, total_err, evaluations});
        }
        const Panel left = gk15(f, worst.lo, mid);
        const Panel right = gk15(f, mid, worst.hi);
        evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);

        // Re-sum periodically; the running updates drift by rounding.
        if (panels.size() % 64 == 0 || total_err <= target()) {
            auto copy = panels;
            double v = 0.0;
            double e = 0.0;
            while (!copy.empty()) {
                v += copy.top().value;
                e += copy.top().error;
                copy.pop();
            }
            total = v;
            total_err = e;
        }
    }
    return QuadResult{total, total_err, evaluations};
}

double integrate(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
                 double rel_tol) {
    return integrate_adaptive(f, lo, hi, abs_tol, rel_tol).value;
}

double norm_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void solve_tridiagonal_into(std::span<const double> sub, std::span<const double> diag,
                            std::span<const double> sup, std::span<const double> rhs,
                            std::span<double> scratch, std::span<double> x) {
    const std::size_t n = diag.size();
    if (n == 0 || rhs.size() != n || x.size() != n || scratch.size() < n ||
        sub.size() + 1 != n || sup.size() + 1 != n) {
        throw InputError("solve_tridiagonal: inconsistent dimensions");
    }
    const auto pivot_check = [](double pivot, std::size_t row) {
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            throw NumericalError("solve_tridiagonal: zero pivot at row " + std::to_string(row));
        }
    };

    pivot_check(diag[0], 0);
    double denom = diag[0];
    scratch[0] = n > 1 ? sup[0] / denom : 0.0;
    x[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - sub[i - 1] * scratch[i - 1];
        pivot_check(denom, i);
        scratch[i] = i + 1 < n ? sup[i] / denom : 0.0;
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] -= scratch[i] * x[i + 1];
    }
}

std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> sup, std::span<const double> rhs) {
    std::vector<double> x(diag.size());
    std::vector<double> scratch(diag.size());
    solve_tridiagonal_into(sub, diag, sup, rhs, scratch, x);
    return x;
}

namespace {

double safe_eval(const Objective& objective, std::span<const double> x) {
    const double v = objective(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s);
}

} // namespace

OptimResult nelder_mead(const Objective& objective, std::span<const double> x0,
                        std::span<const double> step0, double tol_f, double tol_x,
                        std::size_t max_iter) {
    const std::size_t n = x0.size();
    if (step0.size() != n) {
        throw InputError("nelder_mead: step0 must match x0 in size");
    }
    std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(x0.begin(), x0.end()));
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += step0[i];
    }
    return nelder_mead(objective, std::move(simplex), tol_f, tol_x, max_iter);
}

OptimResult nelder_mead(const Objective& objective, std::vector<std::vector<double>> simplex,
                        double tol_f, double tol_x, std::size_t max_iter) {
    if (simplex.empty()) {
        throw InputError("nelder_mead: empty simplex");
    }
    const std::size_t n = simplex.size() - 1;
    for (const auto& v : simplex) {
        if (v.size() != n) {
            throw InputError("nelder_mead: simplex must have n+1 vertices of dimension n");
        }
    }
    if (max_iter < 1) {
        throw InputError("nelder_mead: max_iter must be >= 1");
    }
    constexpr double kReflect = 1.0;
    constexpr double kExpand = 2.0;
    constexpr double kContract = 0.5;
    constexpr double kShrink = 0.5;

    std::vector<double> fv(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        fv[j] = safe_eval(objective, simplex[j]);
    }
    std::vector<std::size_t> order(n + 1);

    const auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t i, std::size_t j) { return fv[i] < fv[j]; });
        std::vector<std::vector<double>> s2(n + 1);
        std::vector<double> f2(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            s2[k] = std::move(simplex[order[k]]);
            f2[k] = fv[order[k]];
        }
        simplex.swap(s2);
        fv.swap(f2);
    };
    const auto diameter = [&] {
        double d = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
            d = std::max(d, distance(simplex[j], simplex[0]));
        }
        return d;
    };

    std::vector<double> centroid(n);
    std::vector<double> trial(n);
    std::vector<double> trial2(n);
    const auto along = [&](double t, std::vector<double>& out) {
        // centroid + t * (centroid - worst)
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = centroid[i] + t * (centroid[i] - simplex[n][i]);
        }
    };

    OptimResult result;
    std::size_t iter = 0;
    sort_simplex();
    for (; iter < max_iter; ++iter) {
        const double spread = std::fabs(fv[n] - fv[0]);
        if ((std::isfinite(spread) && spread < tol_f) || diameter() < tol_x) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                centroid[i] += simplex[j][i];
            }
        }
        for (auto& c : centroid) {
            c /= static_cast<double>(n);
        }

        along(kReflect, trial);
        const double fr = safe_eval(objective, trial);
        if (fr < fv[0]) {
            along(kReflect * kExpand, trial2);
            const double fe = safe_eval(objective, trial2);
            if (fe < fr) {
                simplex[n] = trial2;
                fv[n] = fe;
            } else {
                simplex[n] = trial;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = trial;
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            along(outside ? kReflect * kContract : -kContract, trial2);
            const double fc = safe_eval(objective, trial2);
            if (fc < (outside ? fr : fv[n])) {
                simplex[n] = trial2;
                fv[n] = fc;
            } else {
                for (std::size_t j = 1; j <= n; ++j) {
                    for (std::size_t i = 0; i < n; ++i) {
                        simplex[j][i] = simplex[0][i] + kShrink * (simplex[j][i] - simplex[0][i]);
                    }
                    fv[j] = safe_eval(objective, simplex[j]);
                }
            }
        }
        sort_simplex();
    }

    result.x_best = simplex[0];
    result.f_best = fv[0];
    result.iterations = iter;
    result.simplex_diameter = diameter();
    return result;
}

} // namespace mvasicek::numerics
