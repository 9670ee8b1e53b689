// Python bindings for the analytical model, the bound pipeline, and the
// slotted simulator.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dcfcalc/bounds.hpp"
#include "dcfcalc/dcf.hpp"
#include "dcfcalc/sim.hpp"
#include "dcfcalc/traffic.hpp"

namespace py = pybind11;
using namespace dcfcalc;

PYBIND11_MODULE(_core, m) {
    m.doc() = "stochastic network calculus bounds and slotted simulation for 802.11 DCF";

    py::class_<RateCurve>(m, "RateCurve")
        .def_static("affine", &RateCurve::affine, py::arg("rate"), py::arg("burst") = 0.0)
        .def_static("tabulated", &RateCurve::tabulated)
        .def("value_at", &RateCurve::value_at)
        .def_readonly("rate", &RateCurve::rate)
        .def_readonly("burst", &RateCurve::burst);

    py::class_<BoundingFunction>(m, "BoundingFunction")
        .def_static("exponential", &BoundingFunction::exponential, py::arg("coefficient"),
                    py::arg("decay"))
        .def_static("step", &BoundingFunction::step, py::arg("threshold"))
        .def_static("tabulated", &BoundingFunction::tabulated)
        .def_static("zero", &BoundingFunction::zero)
        .def("raw", &BoundingFunction::raw)
        .def("probability", &BoundingFunction::probability)
        .def_readonly("coefficient", &BoundingFunction::coefficient)
        .def_readonly("decay", &BoundingFunction::decay)
        .def_readonly("threshold", &BoundingFunction::threshold)
        .def_readonly("table", &BoundingFunction::table);

    m.def("convolve_bounding", &convolve_bounding, py::arg("f"), py::arg("g"), py::arg("x"));

    py::class_<Trace>(m, "Trace")
        .def(py::init<std::vector<double>>())
        .def("at", &Trace::at)
        .def("horizon", &Trace::horizon)
        .def_readonly("cumulative", &Trace::cumulative);

    m.def("convolve_curve", &convolve_curve);
    m.def("backlog_of", &backlog_of);
    m.def("delay_of", &delay_of);

    py::class_<UpperConstraint>(m, "UpperConstraint")
        .def(py::init([](double theta, double sigma, double rho) {
                 return UpperConstraint{theta, sigma, rho};
             }),
             py::arg("theta"), py::arg("sigma"), py::arg("rho"))
        .def_readonly("theta", &UpperConstraint::theta)
        .def_readonly("sigma", &UpperConstraint::sigma)
        .def_readonly("rho", &UpperConstraint::rho);

    py::class_<VbcArrivalCurve>(m, "VbcArrivalCurve")
        .def_readonly("alpha", &VbcArrivalCurve::alpha)
        .def_readonly("f", &VbcArrivalCurve::f);

    py::class_<TrafficModel> traffic(m, "TrafficModel");
    traffic.def_static("poisson", &TrafficModel::poisson, py::arg("lambda_"))
        .def_static("cbr", &TrafficModel::cbr, py::arg("lambda_"))
        .def_readonly("lambda_", &TrafficModel::lambda)
        .def("envelope_average_rate", &TrafficModel::envelope_average_rate);

    m.def("poisson_constraint", &poisson_constraint, py::arg("lambda_"), py::arg("theta"));
    m.def("cbr_arrival_curve", &cbr_arrival_curve, py::arg("lambda_"));
    m.def("vbc_from_constraint", &vbc_from_constraint, py::arg("constraint"), py::arg("r"));

    py::class_<PhyParams>(m, "PhyParams")
        .def(py::init<>())
        .def_readwrite("basic_rate_bps", &PhyParams::basic_rate_bps)
        .def_readwrite("data_rate_bps", &PhyParams::data_rate_bps)
        .def_readwrite("phy_header_bytes", &PhyParams::phy_header_bytes)
        .def_readwrite("ack_header_bytes", &PhyParams::ack_header_bytes)
        .def_readwrite("mac_header_bytes", &PhyParams::mac_header_bytes)
        .def_readwrite("sifs_us", &PhyParams::sifs_us)
        .def_readwrite("difs_us", &PhyParams::difs_us)
        .def_readwrite("idle_slot_us", &PhyParams::idle_slot_us)
        .def_readwrite("cw_min", &PhyParams::cw_min)
        .def_readwrite("cw_max", &PhyParams::cw_max)
        .def_readwrite("retry_limit", &PhyParams::retry_limit);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("nodes", &Scenario::nodes)
        .def_readwrite("payload_bytes", &Scenario::payload_bytes)
        .def_readwrite("phy", &Scenario::phy)
        .def_readwrite("traffic", &Scenario::traffic);

    py::class_<SlotTiming>(m, "SlotTiming")
        .def_readonly("data_slots", &SlotTiming::data_slots)
        .def_readonly("ack_slots", &SlotTiming::ack_slots)
        .def_readonly("difs_slots", &SlotTiming::difs_slots)
        .def_readonly("sifs_slots", &SlotTiming::sifs_slots)
        .def_readonly("slot_length", &SlotTiming::slot_length)
        .def_readonly("slot_length_int", &SlotTiming::slot_length_int)
        .def_readonly("slot_seconds", &SlotTiming::slot_seconds);

    py::class_<DcfSolution>(m, "DcfSolution")
        .def_readonly("tau", &DcfSolution::tau)
        .def_readonly("gamma", &DcfSolution::gamma)
        .def_readonly("p_nt", &DcfSolution::p_nt)
        .def_readonly("p_t", &DcfSolution::p_t)
        .def_readonly("p_s", &DcfSolution::p_s)
        .def_readonly("p_o", &DcfSolution::p_o)
        .def_readonly("slot_len", &DcfSolution::slot_len)
        .def_readonly("slot_len_int", &DcfSolution::slot_len_int)
        .def_readonly("mean_backoff", &DcfSolution::mean_backoff)
        .def_readonly("nodes", &DcfSolution::nodes);

    m.def("slot_length", &slot_length);
    m.def("solve_fixed_point", &solve_fixed_point);
    m.def("impairment_log_mgf", &impairment_log_mgf, py::arg("t"), py::arg("theta"),
          py::arg("solution"));
    m.def("impairment_mgf", &impairment_mgf, py::arg("t"), py::arg("theta"),
          py::arg("solution"));
    m.def("stability_threshold", &stability_threshold);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("constraint", &FitResult::constraint)
        .def_readonly("t_star", &FitResult::t_star)
        .def_readonly("converged", &FitResult::converged);

    py::class_<WeakServiceCurve>(m, "WeakServiceCurve")
        .def_readonly("beta", &WeakServiceCurve::beta)
        .def_readonly("g", &WeakServiceCurve::g)
        .def_readonly("capacity", &WeakServiceCurve::capacity);

    py::class_<StabilityInput>(m, "StabilityInput")
        .def(py::init([](double a, double i, double c) {
                 return StabilityInput{a, i, c};
             }),
             py::arg("arrival_rate"), py::arg("impairment_rate"), py::arg("capacity") = 1.0);

    py::class_<BacklogTailValue>(m, "BacklogTailValue")
        .def_readonly("probability", &BacklogTailValue::probability)
        .def_readonly("feasible", &BacklogTailValue::feasible);

    py::class_<OptimizerOptions>(m, "OptimizerOptions")
        .def(py::init<>())
        .def_readwrite("theta_min", &OptimizerOptions::theta_min)
        .def_readwrite("theta_max", &OptimizerOptions::theta_max)
        .def_readwrite("theta_points", &OptimizerOptions::theta_points)
        .def_readwrite("improvement_tol", &OptimizerOptions::improvement_tol)
        .def_readwrite("max_sweeps", &OptimizerOptions::max_sweeps)
        .def_readwrite("fit_epsilon", &OptimizerOptions::fit_epsilon)
        .def_readwrite("fit_t_max", &OptimizerOptions::fit_t_max);

    py::class_<BoundReport>(m, "BoundReport")
        .def_readonly("feasible", &BoundReport::feasible)
        .def_readonly("theta1", &BoundReport::theta1)
        .def_readonly("theta2", &BoundReport::theta2)
        .def_readonly("r_arrival", &BoundReport::r_arrival)
        .def_readonly("r_impairment", &BoundReport::r_impairment)
        .def_readonly("arrival_tail", &BoundReport::arrival_tail)
        .def_readonly("service_tail", &BoundReport::service_tail)
        .def_readonly("x_grid", &BoundReport::x_grid)
        .def_readonly("tail", &BoundReport::tail)
        .def_readonly("expected_backlog", &BoundReport::expected_backlog);

    m.def("fit_upper_constraint",
          [](const std::function<double(int)>& M, double theta, double epsilon, int t_max) {
              return fit_upper_constraint(M, theta, epsilon, t_max);
          },
          py::arg("M"), py::arg("theta"), py::arg("epsilon") = 1e-5, py::arg("t_max") = 500);
    m.def("fit_upper_constraint_table",
          [](const std::vector<double>& M, double theta, double epsilon) {
              return fit_upper_constraint(std::span<const double>(M), theta, epsilon);
          },
          py::arg("M"), py::arg("theta"), py::arg("epsilon") = 1e-5);
    m.def("fit_impairment", &fit_impairment, py::arg("solution"), py::arg("theta2"),
          py::arg("epsilon") = 1e-5, py::arg("t_max") = 500);
    m.def("service_curve", &service_curve, py::arg("solution"), py::arg("theta2"),
          py::arg("r_impairment"), py::arg("fit_epsilon") = 1e-5, py::arg("fit_t_max") = 500);
    m.def("check_stability", &check_stability);
    m.def("backlog_tail", &backlog_tail, py::arg("arrival"), py::arg("service"), py::arg("x"));
    m.def("optimize_backlog_tail",
          [](const TrafficModel& arrival, const DcfSolution& sol,
             const std::vector<double>& x_grid, const OptimizerOptions& options) {
              return optimize_backlog_tail(arrival, sol, x_grid, options);
          },
          py::arg("arrival"), py::arg("solution"), py::arg("x_grid"),
          py::arg("options") = OptimizerOptions{});
    m.def("expected_backlog_bound", &expected_backlog_bound, py::arg("report"),
          py::arg("i_max") = 10000);
    m.def("delay_mean_bound", &delay_mean_bound);
    m.def("delay_tail_bound", &delay_tail_bound);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("scenario", &SimConfig::scenario)
        .def_readwrite("duration_s", &SimConfig::duration_s)
        .def_readwrite("replications", &SimConfig::replications)
        .def_readwrite("snapshot_s", &SimConfig::snapshot_s)
        .def_readwrite("seed", &SimConfig::seed);

    py::class_<ReplicationResult>(m, "ReplicationResult")
        .def_readonly("arrivals", &ReplicationResult::arrivals)
        .def_readonly("departures", &ReplicationResult::departures)
        .def_readonly("snapshot_backlog", &ReplicationResult::snapshot_backlog)
        .def_readonly("snapshot_delay", &ReplicationResult::snapshot_delay)
        .def_readonly("live_queue_at_snapshot", &ReplicationResult::live_queue_at_snapshot)
        .def_readonly("drops_before_snapshot", &ReplicationResult::drops_before_snapshot)
        .def_readonly("time_avg_backlog", &ReplicationResult::time_avg_backlog)
        .def_readonly("attempts", &ReplicationResult::attempts)
        .def_readonly("collided_attempts", &ReplicationResult::collided_attempts)
        .def_readonly("idle_boundaries", &ReplicationResult::idle_boundaries)
        .def_readonly("successes", &ReplicationResult::successes)
        .def_readonly("drops", &ReplicationResult::drops);

    py::class_<SimResult>(m, "SimResult")
        .def_readonly("backlog_samples", &SimResult::backlog_samples)
        .def_readonly("delay_samples", &SimResult::delay_samples)
        .def_readonly("censored_delays", &SimResult::censored_delays)
        .def_readonly("censored_fraction", &SimResult::censored_fraction)
        .def_readonly("censoring_flagged", &SimResult::censoring_flagged)
        .def_readonly("mean_backlog", &SimResult::mean_backlog)
        .def_readonly("mean_snapshot_backlog", &SimResult::mean_snapshot_backlog)
        .def_readonly("mean_virtual_delay_s", &SimResult::mean_virtual_delay_s)
        .def_readonly("mean_sojourn_delay_s", &SimResult::mean_sojourn_delay_s)
        .def_readonly("per_node_throughput", &SimResult::per_node_throughput)
        .def_readonly("drops", &SimResult::drops)
        .def_readonly("slot_seconds", &SimResult::slot_seconds)
        .def("backlog_tail", &SimResult::backlog_tail)
        .def("delay_tail", &SimResult::delay_tail);

    m.def("run_replication", &run_replication, py::arg("config"), py::arg("replication_index"),
          py::call_guard<py::gil_scoped_release>());
    m.def("run_experiment", &run_experiment, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<SaturationStats>(m, "SaturationStats")
        .def_readonly("tau_hat", &SaturationStats::tau_hat)
        .def_readonly("gamma_hat", &SaturationStats::gamma_hat)
        .def_readonly("throughput_per_node", &SaturationStats::throughput_per_node)
        .def_readonly("solved", &SaturationStats::solved)
        .def_readonly("analytical_throughput", &SaturationStats::analytical_throughput)
        .def_readonly("tau_error", &SaturationStats::tau_error)
        .def_readonly("gamma_error", &SaturationStats::gamma_error)
        .def_readonly("throughput_rel_error", &SaturationStats::throughput_rel_error);

    m.def("saturation_validate", &saturation_validate, py::arg("scenario"),
          py::arg("duration_s") = 20.0, py::arg("seed") = 1,
          py::call_guard<py::gil_scoped_release>());
}
