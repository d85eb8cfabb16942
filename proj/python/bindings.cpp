#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cepsched/experiment.hpp"

namespace py = pybind11;
using namespace cepsched;

namespace {

ExperimentConfig parse_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", e.what());
  }
  return parse_experiment(doc);
}

py::dict run_summary(const std::string& config_json) {
  const auto cfg = parse_text(config_json);
  std::optional<Millis> lb;
  const auto m = run_point(cfg, &lb);
  py::dict d;
  d["scheduler"] = std::string(cfg.sim.scheduler.kind_name());
  d["latency_bound"] = lb ? py::cast(*lb) : py::none();
  d["events"] = m.events;
  d["events_in_windows"] = m.events_in_windows;
  d["windows"] = m.windows_opened;
  d["transmissions"] = m.transmissions;
  d["transmissions_per_instance"] = m.transmissions_per_instance;
  d["max_lambda_o"] = m.max_lambda_o();
  d["p99_lambda_o"] = m.lambda_o_quantile(0.99);
  d["violations"] = m.lb_violations;
  return d;
}

py::list stream(const std::string& config_json) {
  const auto cfg = parse_text(config_json);
  const auto types = cfg.sim.workload.types();
  py::list out;
  for (const auto& e : generate_stream(cfg.sim.workload)) {
    out.append(py::make_tuple(e.seq, e.ts, types.name(e.etype),
                              e.key ? py::cast(*e.key) : py::none()));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_cepsched, m) {
  m.doc() = "Latency-bounded window scheduling for parallel CEP operators.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CostModelError>(m, "CostModelError", PyExc_RuntimeError);

  m.def("generate_stream", &stream, py::arg("config_json"),
        "Events of the config's workload as (seq, ts, type, key) tuples.");
  m.def("run", &run_summary, py::arg("config_json"),
        "Simulates one config (sweeps ignored) and returns summary metrics.");
  m.def(
      "run_experiment",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> out_dir, bool sweep,
         unsigned jobs, std::optional<std::uint64_t> seed) {
        ExperimentOptions opts;
        opts.output_dir = std::move(out_dir);
        opts.sweep = sweep;
        opts.jobs = jobs;
        opts.seed = seed;
        std::ostringstream out, err;
        int status = 0;
        {
          py::gil_scoped_release release;
          status = run_experiment(config, opts, out, err);
        }
        return py::make_tuple(status, out.str(), err.str());
      },
      py::arg("config"), py::arg("out_dir") = py::none(), py::arg("sweep") = false, py::arg("jobs") = 1,
      py::arg("seed") = py::none(), "Runs a config file like the CLI; returns (status, stdout, stderr).");

  m.def(
      "pair_gains",
      [](const std::vector<std::pair<double, double>>& latency, const std::vector<std::pair<double, double>>& iat,
         double theta) {
        std::vector<LatencyBinCount> l;
        std::vector<IatBinCount> i;
        for (const auto& [v, c] : latency) l.push_back({v, c});
        for (const auto& [v, c] : iat) i.push_back({v, c});
        const auto g = pair_gains(std::move(l), std::move(i), theta);
        py::dict d;
        d["gamma_minus"] = g.gamma_minus;
        d["gamma_plus"] = g.gamma_plus;
        d["paired"] = g.paired;
        return d;
      },
      py::arg("latency_bins"), py::arg("iat_bins"), py::arg("theta") = 1.0,
      "Gains from (latency, count) and (iat, count) bins.");
  m.def("queue_peak", &queue_peak, py::arg("lambda_q_init"), py::arg("gamma_minus"), py::arg("gamma_plus"),
        py::arg("alpha"));
  m.def(
      "predict_overlap",
      [](double theta_hat, double ws, double delta) { return predict_overlap(theta_hat, ws, delta).theta_bar; },
      py::arg("theta_hat"), py::arg("ws"), py::arg("delta"));
  m.def(
      "predict_alpha_tcount",
      [](std::uint64_t c_minus, std::uint64_t c_plus, std::uint64_t c_trans) {
        return predict_alpha_tcount({c_minus, c_plus, c_trans});
      },
      py::arg("c_minus"), py::arg("c_plus"), py::arg("c_trans"));

  m.def("selftest_worked_example", [] {
    const auto r = selftest_worked_example();
    py::dict d;
    d["gamma_minus"] = r.gamma_minus;
    d["gamma_plus"] = r.gamma_plus;
    d["lambda_q_max"] = py::make_tuple(r.lambda_q_max_alpha0, r.lambda_q_max_alpha08, r.lambda_q_max_alpha1);
    d["simulated_worst_peak"] = r.simulated_worst_peak;
    d["simulated_best_peak"] = r.simulated_best_peak;
    d["ok"] = r.ok;
    return d;
  });
  m.def(
      "bench_scheduling_latency",
      [](std::size_t iat_bins, std::size_t lat_bins, std::size_t types, std::size_t decisions) {
        const auto b = bench_scheduling_latency(iat_bins, lat_bins, types, decisions);
        py::dict d;
        d["total_bins"] = b.total_bins;
        d["decisions"] = b.decisions;
        d["model_based_median_ms"] = b.model_based_median;
        d["model_based_mean_ms"] = b.model_based_mean;
        d["round_robin_median_ms"] = b.round_robin_median;
        d["reactive_median_ms"] = b.reactive_median;
        return d;
      },
      py::arg("iat_bins") = 8, py::arg("lat_bins") = 4, py::arg("types") = 6, py::arg("decisions") = 10000);
}
