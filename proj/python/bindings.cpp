#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "veh/cli.hpp"
#include "veh/errors.hpp"
#include "veh/lyapunov.hpp"
#include "veh/model.hpp"
#include "veh/optimize.hpp"
#include "veh/sim.hpp"
#include "veh/spectral.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace veh;

namespace {

// N x 5 array of the sampled states
Eigen::MatrixXd states_matrix(const Trajectory& t) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(t.states.size()), kStates);
    for (std::size_t k = 0; k < t.states.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = t.states[k].transpose();
    return out;
}

std::tuple<int, std::string, std::string> run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stationary power of a feedback-controlled piezoelectric vibration harvester";

    auto base = py::register_exception<Error>(m, "VehError", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base);
    py::register_exception<InfeasibleGainsError>(m, "InfeasibleGainsError", base);
    py::register_exception<UnstableError>(m, "UnstableError", base);
    py::register_exception<SingularSolveError>(m, "SingularSolveError", base);
    py::register_exception<NumericError>(m, "NumericError", base);
    py::register_exception<ToleranceError>(m, "ToleranceError", base);
    py::register_exception<PoleOnGridError>(m, "PoleOnGridError", base);
    py::register_exception<ConfigError>(m, "ConfigError", base);

    py::enum_<EvalMethod>(m, "EvalMethod")
        .value("lyapunov", EvalMethod::lyapunov)
        .value("spectral", EvalMethod::spectral);
    py::enum_<TransferMode>(m, "TransferMode")
        .value("statespace", TransferMode::statespace)
        .value("paper", TransferMode::paper);
    py::enum_<Scheme>(m, "Scheme")
        .value("exact", Scheme::exact)
        .value("euler_maruyama", Scheme::euler_maruyama);

    py::class_<HarvesterParams>(m, "HarvesterParams")
        .def(py::init<>())
        .def(py::init([](double zeta_s, double lambda_, double zeta_h, double kappa, double alpha, double W) {
                 HarvesterParams p{zeta_s, lambda_, zeta_h, kappa, alpha, W};
                 p.validate();
                 return p;
             }),
             "zeta_s"_a = 0.01, "lambda_"_a = 5.0, "zeta_h"_a = 0.01, "kappa"_a = 0.6, "alpha"_a = 10.0, "W"_a = 1.0)
        .def_readwrite("zeta_s", &HarvesterParams::zeta_s)
        .def_readwrite("lambda_", &HarvesterParams::lambda)
        .def_readwrite("zeta_h", &HarvesterParams::zeta_h)
        .def_readwrite("kappa", &HarvesterParams::kappa)
        .def_readwrite("alpha", &HarvesterParams::alpha)
        .def_readwrite("W", &HarvesterParams::W)
        .def("validate", &HarvesterParams::validate)
        .def("__repr__", [](const HarvesterParams& p) {
            std::ostringstream os;
            os << "HarvesterParams(zeta_s=" << p.zeta_s << ", lambda_=" << p.lambda << ", zeta_h=" << p.zeta_h
               << ", kappa=" << p.kappa << ", alpha=" << p.alpha << ", W=" << p.W << ")";
            return os.str();
        });

    py::class_<ControlGains>(m, "ControlGains")
        .def(py::init([](double K_m, double K_e) { return ControlGains{K_m, K_e}; }), "K_m"_a, "K_e"_a)
        .def_readwrite("K_m", &ControlGains::K_m)
        .def_readwrite("K_e", &ControlGains::K_e)
        .def(py::self == py::self)
        .def("__repr__", [](const ControlGains& g) {
            std::ostringstream os;
            os << "ControlGains(K_m=" << g.K_m << ", K_e=" << g.K_e << ")";
            return os.str();
        });

    py::class_<StateSpaceModel>(m, "StateSpaceModel")
        .def_readonly("A", &StateSpaceModel::A)
        .def_readonly("B_xi", &StateSpaceModel::B_xi)
        .def_readonly("C", &StateSpaceModel::C)
        .def_readonly("params", &StateSpaceModel::params)
        .def_readonly("gains", &StateSpaceModel::gains);

    py::class_<StabilityReport>(m, "StabilityReport")
        .def_readonly("stable", &StabilityReport::stable)
        .def_readonly("margin", &StabilityReport::margin);

    m.def("validate_gains", &validate_gains, "gains"_a);
    m.def("build_open_loop", &build_open_loop, "params"_a);
    m.def("build_closed_loop", &build_closed_loop, "params"_a, "gains"_a);
    m.def("is_hurwitz", py::overload_cast<const StateSpaceModel&>(&is_hurwitz), "model"_a);

    m.def("mean_power", [](const StateSpaceModel& model, double W) { return mean_power(model, W); }, "model"_a,
          "W"_a = 1.0, "Stationary mean power C P C^T from the Lyapunov equation.");
    m.def("stationary_covariance",
          [](const StateSpaceModel& model, double W) { return stationary_covariance(model, W).P; }, "model"_a,
          "W"_a = 1.0);

    py::class_<QuadratureOptions>(m, "QuadratureOptions")
        .def(py::init<>())
        .def_readwrite("rel_tol", &QuadratureOptions::rel_tol)
        .def_readwrite("abs_tol", &QuadratureOptions::abs_tol)
        .def_readwrite("max_intervals", &QuadratureOptions::max_intervals);

    py::class_<SpectralPower>(m, "SpectralPower")
        .def_readonly("J", &SpectralPower::J)
        .def_readonly("unnormalized_integral", &SpectralPower::unnormalized_integral)
        .def_readonly("error_estimate", &SpectralPower::error_estimate)
        .def_readonly("omega_max", &SpectralPower::omega_max)
        .def_readonly("tail_bound", &SpectralPower::tail_bound)
        .def_readonly("intervals", &SpectralPower::intervals);

    m.def("transfer_statespace", &transfer_statespace, "model"_a, "omega"_a);
    m.def("transfer_paper_literal", &transfer_paper_literal, "params"_a, "gains"_a, "omega"_a);
    m.def("harvested_power_spectral",
          py::overload_cast<const StateSpaceModel&, double, const QuadratureOptions&>(&harvested_power_spectral),
          "model"_a, "W"_a = 1.0, "options"_a = QuadratureOptions{});
    m.def("harvested_power_paper_literal", &harvested_power_paper_literal, "params"_a, "gains"_a, "W"_a = 1.0,
          "options"_a = QuadratureOptions{});
    m.def(
        "spectrum_curve",
        [](const StateSpaceModel& model, const std::vector<double>& grid) { return spectrum_curve(model, grid).gain_sq; },
        "model"_a, "omega"_a, "|H(i omega)|^2 on an increasing grid.");

    py::class_<SimOptions>(m, "SimOptions")
        .def(py::init<>())
        .def_readwrite("h", &SimOptions::h)
        .def_readwrite("n_steps", &SimOptions::n_steps)
        .def_readwrite("seed", &SimOptions::seed)
        .def_readwrite("scheme", &SimOptions::scheme)
        .def_readwrite("burn_in", &SimOptions::burn_in)
        .def_readwrite("batches", &SimOptions::batches);

    py::class_<PowerEstimate>(m, "PowerEstimate")
        .def_readonly("mean", &PowerEstimate::mean)
        .def_readonly("std_error", &PowerEstimate::std_error)
        .def_readonly("burn_in_steps", &PowerEstimate::burn_in_steps)
        .def_readonly("samples", &PowerEstimate::samples)
        .def_readonly("batches", &PowerEstimate::batches);

    m.def(
        "simulate",
        [](const StateSpaceModel& model, double W, double h, std::size_t n_steps, std::uint64_t seed, Scheme scheme) {
            return states_matrix(simulate(model, W, h, n_steps, seed, scheme));
        },
        "model"_a, "W"_a, "h"_a, "n_steps"_a, "seed"_a, "scheme"_a = Scheme::exact,
        "Sampled states as an (n_steps + 1) x 5 array starting from x_0 = 0.");
    m.def("simulate_power", &simulate_power, "model"_a, "W"_a, "options"_a, py::call_guard<py::gil_scoped_release>());
    m.def("simulate_power_ensemble", &simulate_power_ensemble, "model"_a, "W"_a, "options"_a, "members"_a,
          "threads"_a = 0u, py::call_guard<py::gil_scoped_release>());

    py::class_<PowerEvaluator>(m, "PowerEvaluator")
        .def(py::init([](EvalMethod method, TransferMode transfer) {
                 PowerEvaluator e;
                 e.method = method;
                 e.transfer = transfer;
                 return e;
             }),
             "method"_a = EvalMethod::lyapunov, "transfer"_a = TransferMode::statespace)
        .def_readwrite("method", &PowerEvaluator::method)
        .def_readwrite("transfer", &PowerEvaluator::transfer)
        .def_readwrite("quadrature", &PowerEvaluator::quadrature)
        .def("__call__", &PowerEvaluator::operator(), "params"_a, "gains"_a);

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("km_values", &SweepResult::km_values)
        .def_readonly("ke_values", &SweepResult::ke_values)
        .def_readonly("J", &SweepResult::J)
        .def_property_readonly("failures",
                               [](const SweepResult& r) {
                                   std::vector<std::tuple<std::size_t, std::size_t, std::string>> out;
                                   for (const SweepFailure& f : r.failures) out.emplace_back(f.i, f.j, f.message);
                                   return out;
                               })
        .def("argmax", &SweepResult::argmax);

    m.def("linspace", &linspace, "lo"_a, "hi"_a, "n"_a);
    m.def("logspace", &logspace, "lo"_a, "hi"_a, "n"_a);
    m.def("sweep", &sweep, "params"_a, "km_grid"_a, "ke_grid"_a, "evaluator"_a = PowerEvaluator{}, "threads"_a = 0u,
          py::call_guard<py::gil_scoped_release>());

    py::class_<OptimOptions>(m, "OptimOptions")
        .def(py::init<>())
        .def_readwrite("evaluator", &OptimOptions::evaluator)
        .def_readwrite("max_iterations", &OptimOptions::max_iterations)
        .def_readwrite("tol", &OptimOptions::tol)
        .def_readwrite("initial_step", &OptimOptions::initial_step)
        .def_readwrite("starts", &OptimOptions::starts)
        .def_readwrite("fixed_km", &OptimOptions::fixed_km)
        .def_readwrite("fixed_ke", &OptimOptions::fixed_ke);

    py::class_<OptimResult>(m, "OptimResult")
        .def_readonly("gains_star", &OptimResult::gains_star)
        .def_readonly("J_star", &OptimResult::J_star)
        .def_readonly("iterations", &OptimResult::iterations)
        .def_readonly("converged", &OptimResult::converged)
        .def_property_readonly("trace", [](const OptimResult& r) {
            std::vector<std::tuple<double, double, double>> out;
            for (const TracePoint& t : r.trace) out.emplace_back(t.gains.K_m, t.gains.K_e, t.J);
            return out;
        });

    m.def("maximize_gains", &maximize_gains, "params"_a, "init"_a, "options"_a = OptimOptions{},
          py::call_guard<py::gil_scoped_release>());

    m.def("run_cli", &run_cli, "args"_a, "Runs the vehopt command line; returns (exit_code, stdout, stderr).");
}
