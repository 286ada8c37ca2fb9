#include "legible/errors.hpp"
#include "legible/experiment.hpp"
#include "legible/geom.hpp"
#include "legible/oracles.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <tuple>

namespace py = pybind11;
namespace ex = legible::experiment;
using legible::geom::Point3;

namespace
{

using Triple = std::array<double, 3>;

std::vector<Point3> to_points(const std::vector<Triple> & xs)
{
  std::vector<Point3> out;
  out.reserve(xs.size());
  for (const auto & x : xs) out.push_back({x[0], x[1], x[2]});
  return out;
}

std::vector<Triple> from_points(const std::vector<Point3> & ps)
{
  std::vector<Triple> out;
  out.reserve(ps.size());
  for (const auto & p : ps) out.push_back({p.x, p.y, p.z});
  return out;
}

legible::geom::Viewpoint to_viewpoint(const std::optional<std::array<Triple, 3>> & vp)
{
  if (!vp) return legible::oracles::default_viewpoint();
  const auto & v = *vp;
  return {{v[0][0], v[0][1], v[0][2]}, {v[1][0], v[1][1], v[1][2]}, {v[2][0], v[2][1], v[2][2]}};
}

// Configuration crosses the boundary as a JSON document.
ex::ExperimentConfig to_config(const std::string & doc)
{
  const auto parsed = legible::json::parse(doc);
  const auto scale = parsed.contains("scale") ? ex::scale_from_name(parsed["scale"].get<std::string>()) : ex::Scale::Desk;
  return ex::config_from_json(parsed, ex::preset(scale));
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Native core of the legible package";

  py::register_exception<legible::Error>(m, "LegibleError", PyExc_ValueError);

  m.def(
    "arc_length", [](const std::vector<Triple> & waypoints) { return legible::geom::arc_length(to_points(waypoints)); },
    py::arg("waypoints"));
  m.def(
    "resample_uniform",
    [](const std::vector<Triple> & waypoints, std::size_t n) {
      return from_points(legible::geom::resample_uniform({to_points(waypoints)}, n).points);
    },
    py::arg("waypoints"), py::arg("n") = 100);
  m.def(
    "project_viewpoint",
    [](const std::vector<Triple> & points, const std::optional<std::array<Triple, 3>> & viewpoint) {
      std::vector<std::array<double, 2>> out;
      for (const auto & p : legible::geom::project_viewpoint(to_points(points), to_viewpoint(viewpoint))) {
        out.push_back({p.u, p.v});
      }
      return out;
    },
    py::arg("points"), py::arg("viewpoint") = py::none(), "viewpoint is (eye, look_at, up)");

  m.def(
    "compute_scores",
    [](const std::string & metric, const std::vector<Triple> & trajectory, const std::vector<Triple> & goals,
       const std::optional<std::array<Triple, 3>> & viewpoint) {
      const legible::geom::Trajectory traj{to_points(trajectory)};
      return legible::oracles::compute_scores(
               legible::oracles::metric_from_name(metric), traj, to_points(goals), to_viewpoint(viewpoint))
        .scores;
    },
    py::arg("metric"), py::arg("trajectory"), py::arg("goals"), py::arg("viewpoint") = py::none());
  m.def(
    "scores_to_distribution",
    [](const std::vector<double> & scores) { return legible::oracles::scores_to_distribution(scores).probabilities; },
    py::arg("scores"));

  m.def(
    "resolve_config", [](const std::string & doc) { return ex::to_json(to_config(doc)).dump(); }, py::arg("doc"));
  m.def(
    "config_hash", [](const std::string & doc) { return ex::config_hash(to_config(doc)); }, py::arg("doc"));

  m.def(
    "gen",
    [](const std::string & doc) {
      const auto manifests = ex::cmd_gen(to_config(doc));
      legible::json out = legible::json::array();
      for (const auto & man : manifests) out.push_back(legible::envgen::to_json(man));
      return out.dump();
    },
    py::arg("doc"), py::call_guard<py::gil_scoped_release>());
  m.def(
    "label", [](const std::string & doc) { ex::cmd_label(to_config(doc)); }, py::arg("doc"),
    py::call_guard<py::gil_scoped_release>());
  m.def(
    "train_slotv",
    [](const std::string & doc, const std::string & split, const std::string & metric, std::size_t repeat) {
      return ex::cmd_train_slotv(to_config(doc), split, legible::oracles::metric_from_name(metric), repeat);
    },
    py::arg("doc"), py::arg("split"), py::arg("metric"), py::arg("repeat"), py::call_guard<py::gil_scoped_release>());
  m.def(
    "train_trex",
    [](const std::string & doc, const std::string & split, const std::string & metric, std::size_t repeat) {
      return ex::cmd_train_trex(to_config(doc), split, legible::oracles::metric_from_name(metric), repeat);
    },
    py::arg("doc"), py::arg("split"), py::arg("metric"), py::arg("repeat"), py::call_guard<py::gil_scoped_release>());
  m.def(
    "evaluate",
    [](const std::filesystem::path & model, const std::filesystem::path & labeled,
       const std::filesystem::path & environments, const std::string & metric) {
      return ex::cmd_eval(model, labeled, environments, legible::oracles::metric_from_name(metric)).to_json().dump();
    },
    py::arg("model"), py::arg("labeled"), py::arg("environments"), py::arg("metric"),
    py::call_guard<py::gil_scoped_release>());
  m.def(
    "table",
    [](const std::string & doc) {
      const auto result = ex::cmd_table(to_config(doc));
      std::vector<std::tuple<std::string, std::string, std::string, double, double, std::size_t>> rows;
      for (const auto & r : result.rows) {
        rows.emplace_back(r.framework, legible::oracles::metric_name(r.metric), r.split, r.mean, r.sd, r.n);
      }
      return rows;
    },
    py::arg("doc"), py::call_guard<py::gil_scoped_release>());
  m.def(
    "curve",
    [](const std::string & doc) {
      const auto rows = ex::cmd_curve(to_config(doc));
      std::vector<std::tuple<std::string, std::size_t, std::size_t, double, double, std::size_t>> out;
      for (const auto & r : rows) out.emplace_back(r.framework, r.updates, r.examples_seen, r.mean_accuracy, r.sd, r.n);
      return out;
    },
    py::arg("doc"), py::call_guard<py::gil_scoped_release>());
}
