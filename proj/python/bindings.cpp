#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "socnav/harness.hpp"
#include "socnav/ingest.hpp"
#include "socnav/metrics.hpp"
#include "socnav/protocol.hpp"
#include "socnav/robot.hpp"

namespace py = pybind11;
using namespace socnav;

namespace {

using Point = std::pair<double, double>;

std::vector<Vec2> to_vec2(const std::vector<Point>& pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (auto [x, y] : pts) out.push_back({x, y});
  return out;
}

AgentState agent(Point p, Point v, double radius) {
  AgentState a;
  a.pose = Pose2D(p.first, p.second, 0.0);
  a.velocity = {v.first, v.second};
  a.radius = radius;
  return a;
}

py::dict meta_dict(const MetaReport& m) {
  py::dict d;
  d["episodes"] = m.episodes;
  d["successes"] = m.successes;
  d["success_rate"] = m.success_rate;
  d["failures"] = m.failures.str();
  d["pedestrian_collisions"] = m.total_pedestrian_collisions;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Replay-based social navigation benchmark core";
  m.attr("PROTOCOL_VERSION") = protocol::kVersion;

  py::register_exception<protocol::ProtocolError>(m, "ProtocolError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def(
      "canonical_line", [](const std::string& line) { return protocol::encode(protocol::decode(line)); },
      "Decodes one wire line and re-encodes it, newline-terminated.");
  m.def("message_type", [](const std::string& line) { return protocol::type_name(protocol::decode(line)); });

  m.def("path_length", [](const std::vector<Point>& pts) { return path_length(to_vec2(pts)); });
  m.def(
      "kinematics",
      [](const std::vector<Point>& pts, double dt) {
        const auto k = kinematic_stats(to_vec2(pts), dt);
        py::dict d;
        d["average_speed"] = k.average_speed;
        d["energy"] = k.energy;
        d["average_acceleration"] = k.average_acceleration;
        d["average_jerk"] = k.average_jerk;
        return d;
      },
      py::arg("positions"), py::arg("dt") = 0.04);
  m.def(
      "time_to_collision",
      [](Point rp, Point rv, double rr, Point pp, Point pv, double pr) {
        return time_to_collision(agent(rp, rv, rr), agent(pp, pv, pr));
      },
      py::arg("robot_position"), py::arg("robot_velocity"), py::arg("robot_radius"), py::arg("ped_position"),
      py::arg("ped_velocity"), py::arg("ped_radius"));

  m.def(
      "step_unicycle",
      [](std::tuple<double, double, double> pose, double v, double omega, double dt) {
        AgentState s;
        s.pose = Pose2D(std::get<0>(pose), std::get<1>(pose), std::get<2>(pose));
        const auto n = step_unicycle(s, {v, omega}, dt, RobotSpec{});
        return std::make_tuple(n.pose.x, n.pose.y, n.pose.heading);
      },
      py::arg("pose"), py::arg("v"), py::arg("omega"), py::arg("dt") = 0.04);

  m.def(
      "parse_tracks",
      [](const std::string& text, double frame_rate) {
        std::map<AgentId, std::vector<std::tuple<double, double, double>>> out;
        for (const auto& [id, samples] : parse_track_file(text, frame_rate).tracks) {
          for (const auto& s : samples) out[id].emplace_back(s.t, s.p.x, s.p.y);
        }
        return out;
      },
      py::arg("text"), py::arg("frame_rate") = 25.0);

  m.def(
      "run_benchmark",
      [](const std::string& config_json) {
        const auto config = config_from_json(nlohmann::json::parse(config_json));
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_benchmark(config);
        }
        return r.meta ? py::object(meta_dict(*r.meta)) : py::object(py::none());
      },
      "Runs a benchmark from a JSON config; returns the aggregate or None when nothing ran.");
}
