#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "slicenego/errors.hpp"
#include "slicenego/harness.hpp"

namespace py = pybind11;
using namespace slicenego;

namespace {

ExperimentConfig config_from_text(const std::string& text) {
  return config_from_json(nlohmann::json::parse(text, nullptr, true, true));
}

py::dict assessment_dict(const RiskAssessment& a) {
  py::dict d;
  d["mean_ms"] = a.stats.mean_ms;
  d["std_ms"] = a.stats.std_ms;
  d["var_ms"] = a.stats.var_alpha_ms;
  d["cvar_ms"] = a.stats.cvar_alpha_ms;
  d["confidence"] = a.confidence;
  d["target_ms"] = a.dynamic_target_ms;
  d["metric_ms"] = a.decision_metric_ms;
  d["sla_met"] = a.sla_met;
  d["over_provisioned"] = a.over_provisioned;
  d["satisfied"] = a.satisfied;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Risk-aware two-slice resource negotiation";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<EstimatorDomainError>(m, "EstimatorDomainError", PyExc_ValueError);
  py::register_exception<UndefinedLatencyError>(m, "UndefinedLatencyError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ProposerError>(m, "ProposerError", PyExc_RuntimeError);

  py::enum_<Strategy>(m, "Strategy")
      .value("biased", Strategy::biased)
      .value("unbiased", Strategy::unbiased);

  py::enum_<NegotiationStatus>(m, "NegotiationStatus")
      .value("consensus", NegotiationStatus::consensus)
      .value("max_rounds_exhausted", NegotiationStatus::max_rounds_exhausted)
      .value("aborted", NegotiationStatus::aborted);

  // risk metrics
  m.def("empirical_var", [](std::vector<double> xs, double alpha) {
    return empirical_var(SampleSet(std::move(xs)), alpha);
  }, py::arg("samples"), py::arg("alpha"));
  m.def("empirical_cvar", [](std::vector<double> xs, double alpha) {
    return empirical_cvar(SampleSet(std::move(xs)), alpha);
  }, py::arg("samples"), py::arg("alpha"));
  m.def("confidence_score", &confidence_score, py::arg("mean_ms"), py::arg("std_ms"));

  py::class_<Action>(m, "Action")
      .def(py::init<double, double>(), py::arg("bandwidth_mhz"), py::arg("cpu_ghz"))
      .def_readwrite("bandwidth_mhz", &Action::bandwidth_mhz)
      .def_readwrite("cpu_ghz", &Action::cpu_ghz)
      .def("__eq__", [](const Action& a, const Action& b) { return a == b; })
      .def("__repr__", [](const Action& a) {
        return "Action(" + std::to_string(a.bandwidth_mhz) + ", " + std::to_string(a.cpu_ghz) + ")";
      });

  py::class_<QueueState>(m, "QueueState")
      .def(py::init([](double edge, double ran, std::size_t slot) { return QueueState{edge, ran, slot}; }),
           py::arg("edge_bits") = 0.0, py::arg("ran_bits") = 0.0, py::arg("slot_index") = 0)
      .def_readwrite("edge_bits", &QueueState::edge_bits)
      .def_readwrite("ran_bits", &QueueState::ran_bits)
      .def_readwrite("slot_index", &QueueState::slot_index);

  // digital twin
  m.def("step_queues", [](const QueueState& s, const Action& a, double arrivals_bits, double se) {
    return step_queues(s, a, arrivals_bits, se, SystemConstants{});
  }, py::arg("state"), py::arg("action"), py::arg("arrivals_bits"), py::arg("se"),
        "One slot under the default system constants.");

  m.def("predict", [](const Action& a, double mean_rate_mbps, double sla_ms, Strategy strategy,
                      std::uint64_t seed, std::size_t n_mc, double alpha) {
    SystemConstants consts;
    consts.n_mc = n_mc;
    ArrivalProcess forecast{mean_rate_mbps, 0.0, consts.horizon_slots, 1.0, 0.0, 0.0};
    LatencyDistribution d = [&] {
      py::gil_scoped_release nogil;
      return predict_distribution(QueueState{}, a, forecast, consts, seed, alpha);
    }();
    py::dict out = assessment_dict(assess(d, SliceSpec{"slice", sla_ms, strategy, 0.6, alpha}));
    out["compute_ms"] = d.compute_latency_ms;
    out["radio_ms"] = d.radio_latency_mean_ms;
    return out;
  }, py::arg("action"), py::arg("mean_rate_mbps"), py::arg("sla_ms"),
        py::arg("strategy") = Strategy::unbiased, py::arg("seed") = 0, py::arg("n_mc") = 10000,
        py::arg("alpha") = 0.99999,
        "Twin prediction from empty queues with a flat traffic forecast.");

  // power
  m.def("power_w", [](const Action& a) { return power_w(a, PowerParams{}); }, py::arg("action"));
  m.def("energy_saving_fraction", [](const Action& f, const Action& b) {
    return energy_saving_fraction(f, b, PowerParams{});
  }, py::arg("final_action"), py::arg("baseline"));
  m.def("prop_fair_split", [](double b_total, double f_total, double load0, double load1) {
    return prop_fair_split(ResourcePool{b_total, f_total}, {load0, load1});
  }, py::arg("b_total_mhz"), py::arg("f_total_ghz"), py::arg("load0"), py::arg("load1"));

  // experiments
  m.def("default_config", [] { return config_to_json(default_config()).dump(2); },
        "Default experiment configuration as JSON text.");
  m.def("load_config", [](const std::filesystem::path& p) { return config_to_json(load_config(p)).dump(2); },
        py::arg("path"));

  py::class_<TrialResult>(m, "TrialResult")
      .def_readonly("strategy", &TrialResult::strategy)
      .def_readonly("trial", &TrialResult::trial)
      .def_readonly("status", &TrialResult::status)
      .def_readonly("rounds", &TrialResult::rounds)
      .def_readonly("baseline", &TrialResult::baseline)
      .def_readonly("final_allocation", &TrialResult::final_allocation)
      .def_readonly("violation", &TrialResult::violation)
      .def_readonly("max_latency_ms", &TrialResult::max_latency_ms)
      .def_readonly("energy_saving", &TrialResult::energy_saving)
      .def_readonly("verified", &TrialResult::verified)
      .def_readonly("twin_requests", &TrialResult::twin_requests)
      .def_readonly("abort_reason", &TrialResult::abort_reason)
      .def_readonly("transcript", &TrialResult::transcript)
      .def_property_readonly("window_latency_ms", [](const TrialResult& r) { return r.window_latency_ms; })
      .def_property_readonly("verification", [](const TrialResult& r) {
        return py::make_tuple(assessment_dict(r.verification[0]), assessment_dict(r.verification[1]));
      });

  m.def("run_trial", [](const std::string& config, Strategy s, int trial) {
    const ExperimentConfig c = config_from_text(config);
    py::gil_scoped_release nogil;
    return run_trial(c, s, trial);
  }, py::arg("config"), py::arg("strategy"), py::arg("trial"));

  m.def("run_experiment", [](const std::string& config, const std::string& output_dir) {
    const ExperimentConfig c = config_from_text(config);
    std::vector<TrialResult> results;
    std::vector<SliceSummary> summary;
    {
      py::gil_scoped_release nogil;
      if (!output_dir.empty()) ensure_writable(output_dir);
      results = run_experiment(c);
      summary = summarize_results(results, c);
      if (!output_dir.empty()) emit_outputs(results, c, output_dir);
    }
    py::list rows;
    for (const auto& s : summary) {
      py::dict d;
      d["strategy"] = std::string(to_string(s.strategy));
      d["slice"] = s.slice;
      d["trials"] = s.trials;
      d["completed"] = s.completed;
      d["aborted"] = s.aborted;
      d["consensus"] = s.consensus;
      d["violations"] = s.violations;
      d["verification_failures"] = s.verification_failures;
      d["tail_latency_ms"] = s.tail_latency_ms;
      d["median_saving"] = s.median_saving;
      d["mean_saving"] = s.mean_saving;
      rows.append(d);
    }
    return py::make_tuple(results, rows);
  }, py::arg("config"), py::arg("output_dir") = "",
        "Runs every trial; returns (results, summary rows). Writes outputs when output_dir is set.");
}
