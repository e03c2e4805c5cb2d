#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <vector>

#include "mvasicek/calibration.hpp"
#include "mvasicek/model.hpp"
#include "mvasicek/option.hpp"
#include "mvasicek/pde.hpp"
#include "mvasicek/quotes_io.hpp"
#include "mvasicek/simulation.hpp"

namespace py = pybind11;
using namespace mvasicek;

namespace {

py::array_t<double> as_matrix(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    py::array_t<double> out({rows, cols});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> bond_curve(py::array_t<double, py::array::c_style | py::array::forcecast> T,
                               const ModelParams& params) {
    std::vector<double> out(static_cast<std::size_t>(T.size()));
    const double* t = T.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = bond_price(t[i], params);
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Short-rate model with memory";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double a, double b, double sigma, double p, double q, double r0) {
                 return ModelParams{a, b, sigma, p, q, r0};
             }),
             py::arg("a"), py::arg("b"), py::arg("sigma"), py::arg("p"), py::arg("q"), py::arg("r0"))
        .def_readwrite("a", &ModelParams::a)
        .def_readwrite("b", &ModelParams::b)
        .def_readwrite("sigma", &ModelParams::sigma)
        .def_readwrite("p", &ModelParams::p)
        .def_readwrite("q", &ModelParams::q)
        .def_readwrite("r0", &ModelParams::r0)
        .def("violation", &ModelParams::violation)
        .def("valid", &ModelParams::valid)
        .def("validate", &ModelParams::validate)
        .def("__repr__", [](const ModelParams& p) {
            std::ostringstream s;
            s.precision(17);
            s << "ModelParams(a=" << p.a << ", b=" << p.b << ", sigma=" << p.sigma << ", p=" << p.p
              << ", q=" << p.q << ", r0=" << p.r0 << ")";
            return s.str();
        });

    py::class_<AffineCoefficients>(m, "AffineCoefficients")
        .def_readonly("A", &AffineCoefficients::A)
        .def_readonly("C", &AffineCoefficients::C)
        .def_readonly("D", &AffineCoefficients::D)
        .def_readonly("t", &AffineCoefficients::t)
        .def_readonly("T", &AffineCoefficients::T)
        .def("price", &AffineCoefficients::price, py::arg("r"), py::arg("u"));

    m.def("l_fn", &l_fn, py::arg("t"), py::arg("params"));
    m.def("m_fn", &m_fn, py::arg("t"), py::arg("params"));
    m.def("affine", &affine, py::arg("t"), py::arg("T"), py::arg("params"));
    m.def(
        "bond_price",
        [](double T, const ModelParams& params, double t, double r, double u) {
            return bond_price(ModelState{t, r, u}, T, params);
        },
        py::arg("T"), py::arg("params"), py::arg("t"), py::arg("r"), py::arg("u"));
    m.def("bond_price", py::overload_cast<double, const ModelParams&>(&bond_price), py::arg("T"),
          py::arg("params"));
    m.def("bond_curve", &bond_curve, py::arg("T"), py::arg("params"));
    m.def("yield_at", py::overload_cast<double, const ModelParams&>(&yield_at), py::arg("T"),
          py::arg("params"));
    m.def("discount_vol", &discount_vol, py::arg("t"), py::arg("T"), py::arg("params"));

    py::class_<OptionQuote>(m, "OptionQuote")
        .def_readonly("price", &OptionQuote::price)
        .def_readonly("bond_T", &OptionQuote::bond_T)
        .def_readonly("bond_S", &OptionQuote::bond_S)
        .def_readonly("sigma_sq", &OptionQuote::sigma_sq)
        .def_readonly("d_plus", &OptionQuote::d_plus)
        .def_readonly("d_minus", &OptionQuote::d_minus);

    auto spec = [](double S, double T, double K, bool put) {
        return OptionSpec{S, T, K, put ? OptionKind::put : OptionKind::call};
    };
    m.def(
        "call_quote",
        [spec](double S, double T, double K, const ModelParams& p) { return call_quote(spec(S, T, K, false), p); },
        py::arg("S"), py::arg("T"), py::arg("K"), py::arg("params"));
    m.def(
        "put_quote",
        [spec](double S, double T, double K, const ModelParams& p) { return put_quote(spec(S, T, K, true), p); },
        py::arg("S"), py::arg("T"), py::arg("K"), py::arg("params"));
    m.def(
        "call_price",
        [spec](double S, double T, double K, const ModelParams& p) { return call_price(spec(S, T, K, false), p); },
        py::arg("S"), py::arg("T"), py::arg("K"), py::arg("params"));
    m.def(
        "put_price",
        [spec](double S, double T, double K, const ModelParams& p) { return put_price(spec(S, T, K, true), p); },
        py::arg("S"), py::arg("T"), py::arg("K"), py::arg("params"));

    py::class_<sim::McEstimate>(m, "McEstimate")
        .def_readonly("estimate", &sim::McEstimate::estimate)
        .def_readonly("std_error", &sim::McEstimate::std_error)
        .def_readonly("n_paths", &sim::McEstimate::n_paths);

    auto sim_config = [](double horizon, std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                         const std::string& scheme, unsigned threads) {
        sim::SimConfig cfg;
        cfg.horizon = horizon;
        cfg.n_steps = n_steps;
        cfg.n_paths = n_paths;
        cfg.seed = seed;
        if (scheme == "euler") {
            cfg.scheme = sim::Scheme::euler;
        } else if (scheme == "exact") {
            cfg.scheme = sim::Scheme::exact_gaussian;
        } else {
            throw InputError("scheme must be 'euler' or 'exact'");
        }
        cfg.threads = threads;
        return cfg;
    };

    m.def(
        "simulate",
        [sim_config](const ModelParams& params, double horizon, std::size_t n_steps, std::size_t n_paths,
                     std::uint64_t seed, const std::string& scheme, unsigned threads) {
            const auto cfg = sim_config(horizon, n_steps, n_paths, seed, scheme, threads);
            sim::PathSet ps;
            {
                py::gil_scoped_release release;
                ps = sim::simulate(params, cfg);
            }
            py::dict out;
            out["t"] = py::array_t<double>(static_cast<py::ssize_t>(ps.times.size()), ps.times.data());
            out["r"] = as_matrix(ps.r, ps.n_paths, ps.n_points());
            out["u"] = as_matrix(ps.u, ps.n_paths, ps.n_points());
            out["int_r"] = as_matrix(ps.int_r, ps.n_paths, ps.n_points());
            return out;
        },
        py::arg("params"), py::arg("horizon") = 1.0, py::arg("n_steps") = 256, py::arg("n_paths") = 1000,
        py::arg("seed") = 42, py::arg("scheme") = "euler", py::arg("threads") = 0);

    m.def(
        "mc_bond_price",
        [sim_config](const ModelParams& params, double T, std::size_t n_steps, std::size_t n_paths,
                     std::uint64_t seed, const std::string& scheme, unsigned threads) {
            const auto cfg = sim_config(T, n_steps, n_paths, seed, scheme, threads);
            py::gil_scoped_release release;
            return sim::mc_bond_price(params, T, cfg);
        },
        py::arg("params"), py::arg("T"), py::arg("n_steps") = 256, py::arg("n_paths") = 100000,
        py::arg("seed") = 42, py::arg("scheme") = "euler", py::arg("threads") = 0);

    m.def(
        "pde_bond_price",
        [](const ModelParams& params, double T, std::size_t nx, std::size_t ny, std::size_t n_time) {
            py::gil_scoped_release release;
            pde::GridOptions opts;
            opts.nx = nx;
            opts.ny = ny;
            opts.n_time = n_time;
            const auto grid = pde::default_grid(params, T, opts);
            const auto sol = pde::solve(params, T, [](double, double) { return 1.0; }, grid);
            return pde::value_at(sol, params.r0, 0.0);
        },
        py::arg("params"), py::arg("T"), py::arg("nx") = 201, py::arg("ny") = 201, py::arg("n_time") = 400);

    py::class_<calib::CalibrationResult>(m, "CalibrationResult")
        .def_readonly("params", &calib::CalibrationResult::params)
        .def_readonly("sse", &calib::CalibrationResult::sse)
        .def_readonly("residuals", &calib::CalibrationResult::residuals)
        .def_readonly("iterations", &calib::CalibrationResult::iterations)
        .def_readonly("converged", &calib::CalibrationResult::converged)
        .def_readonly("restarts_used", &calib::CalibrationResult::restarts_used)
        .def_readonly("underdetermined", &calib::CalibrationResult::underdetermined);

    auto to_quotes = [](const std::vector<double>& maturities, const std::vector<double>& yields) {
        if (maturities.size() != yields.size()) throw InputError("maturities and yields differ in length");
        calib::QuoteSet q;
        for (std::size_t i = 0; i < maturities.size(); ++i) q.push_back({maturities[i], yields[i]});
        return q;
    };

    m.def(
        "calibrate",
        [to_quotes](const std::vector<double>& maturities, const std::vector<double>& yields,
                    std::size_t n_restarts, std::uint64_t seed, bool fix_p_zero) {
            const auto quotes = to_quotes(maturities, yields);
            calib::CalibrationOptions opts;
            opts.n_restarts = n_restarts;
            opts.seed = seed;
            opts.fix_p_zero = fix_p_zero;
            py::gil_scoped_release release;
            return calib::calibrate(quotes, opts);
        },
        py::arg("maturities"), py::arg("yields"), py::arg("n_restarts") = 20, py::arg("seed") = 0,
        py::arg("fix_p_zero") = false);

    m.def(
        "read_quotes",
        [](const std::filesystem::path& path, bool percent) {
            const auto q = io::parse_quotes(path, percent);
            std::vector<double> T, y;
            for (const auto& x : q) {
                T.push_back(x.maturity);
                y.push_back(x.yield);
            }
            return py::make_tuple(T, y);
        },
        py::arg("path"), py::arg("percent") = false);
}
