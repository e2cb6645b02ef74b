#pragma once

#include <array>

#include "dppl/pipeline.hpp"

namespace dppl::models {

// An axis-aligned box table: size extents and the footprint center on the
// ground plane z=0.
struct TableBox {
  std::array<double, 3> size{1, 1, 1};  // extents, in [0.5, 4] under the prior
  std::array<double, 2> pos{0, 0};
};

struct TableScene {
  double r = 12.0;      // camera distance, in (8, 16)
  double theta = 0.0;   // azimuth, in (0, 2pi)
  double h = 0.0;       // camera height
  std::vector<TableBox> tables;
};

// Look-at-origin camera frame with world up (0,0,1) and focal length 1.
// Degenerate only on the up-axis (r = 0), which the prior excludes.
struct CameraFrame {
  Value position;  // (3)
  Value right, up, forward;
};

struct Camera {
  std::array<double, 3> position;
  std::array<double, 3> right, up, forward;
  double focal_length = 1.0;
};

// Ordered 2D projections of a table's 8 corners.
struct ProjectedTable {
  std::vector<double> vertices;  // 8 x 2, corner order below
  static Shape shape() { return Shape{8, 2}; }
};

// Corner order: bottom face z=0 then top face z=size_z, each counterclockwise
// (-x,-y), (+x,-y), (+x,+y), (-x,+y) around the footprint center.
Value table_corners(const Value& size, const Value& pos);  // (24) = 8 x 3

CameraFrame make_camera_frame(const Value& r, const Value& theta, const Value& h);
Camera make_camera_at(double r, double theta, double h);

// Pinhole projection of the 8 corners: camera-frame coordinates divided by
// depth. Depths are floored smoothly (at kDepthFloor) so traced programs
// stay total; the eager overload instead rejects corners behind the camera.
inline constexpr double kDepthFloor = 0.25;
Value perspective_project(const CameraFrame& camera, const Value& corners);
ProjectedTable perspective_project(const Camera& camera, const TableBox& table);

// Latents: r ~ U(8,16), theta ~ U(0,2pi), h ~ N(0,3); per table
// size ~ U(0.5,4)^3 and pos ~ N(0,2)^2; each projected-vertex observation
// has noise 0.01. Returns each table's size and position.
ModelDefinition tables_model(int n_tables);
std::vector<ObservationSite> tables_observations(std::span<const ProjectedTable> observed);
std::vector<double> tables_step_scale(int n_tables);

ProjectedTable project_scene_table(const TableScene& scene, int index);

struct TablesExperimentConfig {
  HmcHyperparams hmc{500, 72, 0.006, 150};
  ChainInit init{6, 20};
  int n_tables = 2;
  double depth_margin = 0.5;         // hinge threshold on corner depth
  double depth_penalty_weight = 10.0;
};

// Stimulus parameterization, 3 + 5k unconstrained numbers:
//   r = 8 + 8 sigmoid(u0), theta = 2pi sigmoid(u1), h = 3 u2,
//   per table: size = 0.5 + 3.5 sigmoid(.) (x3), pos = 2 . (x2).
TableScene decode_tables_stimulus(std::span<const double> u, int n_tables);
std::vector<double> encode_tables_stimulus(const TableScene& scene);
std::vector<double> tables_initial_stimulus(const RandomKey& key, int n_tables);

// loss = |inferred position of table 0| - |true position of table 0|
// (softened norms) plus a smooth hinge penalty keeping every true corner in
// front of the camera. Minimizing makes table 0 look nearer than it is.
std::shared_ptr<InferencePipeline> tables_pipeline(const TablesExperimentConfig& cfg);
Objective tables_objective(const TablesExperimentConfig& cfg);
double tables_loss(const TableScene& scene, const TablesExperimentConfig& cfg,
                   const RandomKey& key);

}  // namespace dppl::models
