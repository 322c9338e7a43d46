// Python bindings. Structured values cross the boundary as JSON text and are
// decoded by the pure-Python wrapper in mixsearch/__init__.py.

#include "mixsearch/fixtures.hpp"
#include "mixsearch/orchestrator.hpp"
#include "mixsearch/pareto.hpp"
#include "mixsearch/rubric.hpp"
#include "mixsearch/sampler.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace mixsearch;

namespace {

MetricVector to_metric(const std::array<double, 3>& v) { return MetricVector{v}; }

std::string verify(const std::string& response, const std::string& constraints_json) {
  const auto checks = verify_constraints(response, constraints_from_json(Json::parse(constraints_json)));
  Json out = Json::array();
  for (const auto& c : checks.checks) {
    out.push_back({{"id", c.id}, {"passed", c.passed}, {"family", c.family}, {"hard", c.role == CheckRole::Floor}});
  }
  const L2State state = aggregate_l2(checks);
  return Json{{"checks", out}, {"l2_state", to_string(state)}, {"score", score_l1(checks, state).value}}.dump();
}

std::string draw(const std::string& pool_manifest, const std::string& action_json, std::uint64_t budget,
                 std::uint64_t seed) {
  const Pool pool = load_pool(read_pool_manifest(pool_manifest));
  const SampleManifest m = draw_budgeted(effective_distribution(action_from_json(Json::parse(action_json)), pool), pool,
                                         budget, seed);
  return m.summary().dump();
}

std::string run_dir(const std::string& config, const std::string& out, std::optional<int> stop_after) {
  RunOptions opts;
  opts.stop_after_rounds = stop_after;
  const RunSummary s = run(load_loop_config(config), out, opts);
  return Json{{"completed_rounds", s.completed_rounds}, {"complete", s.complete}, {"archive", s.archive_labels}}.dump();
}

std::string replay_dir(const std::string& fixture, const std::string& out) {
  require_valid_fixture(ReplayFixture::load(fixture));
  const RunSummary s = run(replay_config(fixture), out);
  return Json{{"completed_rounds", s.completed_rounds}, {"complete", s.complete}, {"archive", s.archive_labels}}.dump();
}

std::string report_dir(const std::string& dir) {
  const ReportBundle b = report(dir);
  Json rows = Json::array();
  for (const auto& r : b.trajectory) {
    rows.push_back({{"label", r.label},
                    {"round", r.round},
                    {"metric", to_json(r.metric)},
                    {"mixture", r.mixture ? Json(*r.mixture) : Json(nullptr)},
                    {"micro_only", r.micro_only}});
  }
  return Json{{"trajectory", rows}, {"trajectory_text", b.trajectory_text}, {"trajectory_csv", b.trajectory_csv},
              {"archive_csv", b.archive_csv}, {"slices_csv", b.slices_csv}}
      .dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "mixsearch native core";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<BackendError>(m, "BackendError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<FixtureError>(m, "FixtureError", base.ptr());

  m.def("dominates", [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return dominates(to_metric(a), to_metric(b));
  });

  py::class_<ParetoArchive>(m, "ParetoArchive")
      .def(py::init<>())
      .def("insert",
           [](ParetoArchive& a, const std::string& label, const std::array<double, 3>& v) {
             const InsertOutcome o = a.insert(label, to_metric(v));
             return py::make_tuple(std::string(to_string(o.verdict)), o.replaced);
           })
      .def("labels",
           [](const ParetoArchive& a) {
             std::vector<std::string> out;
             for (const auto& e : a.entries()) out.push_back(e.label);
             return out;
           })
      .def("snapshot_json", [](const ParetoArchive& a) { return a.snapshot().dump(); });

  m.def("verify_json", &verify, py::arg("response"), py::arg("constraints_json"));
  m.def("draw_json", &draw, py::arg("pool_manifest"), py::arg("action_json"), py::arg("budget_tokens"),
        py::arg("seed"));
  m.def("run_json", &run_dir, py::arg("config"), py::arg("out"), py::arg("stop_after") = std::nullopt);
  m.def("replay_json", &replay_dir, py::arg("fixture"), py::arg("out"));
  m.def("report_json", &report_dir, py::arg("run_dir"));
  m.def("archive_json", [](const std::string& dir) { return read_archive(dir).dump(); });
}
