#include "dppl/models/tables.hpp"

#include <cmath>

namespace dppl::models {

namespace {

Value vec3(const Value& x, const Value& y, const Value& z) { return concat(concat(x, y), z); }

Value cross(const Value& a, const Value& b) {
  Value ax = index(a, 0), ay = index(a, 1), az = index(a, 2);
  Value bx = index(b, 0), by = index(b, 1), bz = index(b, 2);
  return vec3(ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx);
}

Value normalize(const Value& v) { return v / sqrt(dot(v, v)); }

const double kTwoPi = 2.0 * M_PI;

}  // namespace

Value table_corners(const Value& size, const Value& pos) {
  Value hx = index(size, 0) * 0.5, hy = index(size, 1) * 0.5, sz = index(size, 2);
  Value px = index(pos, 0), py = index(pos, 1);
  Value zero(0.0);
  const double sx[4] = {-1, 1, 1, -1};
  const double sy[4] = {-1, -1, 1, 1};
  Value out;
  for (int level = 0; level < 2; ++level) {
    Value z = level == 0 ? zero : sz;
    for (int k = 0; k < 4; ++k) {
      Value corner = vec3(px + sx[k] * hx, py + sy[k] * hy, z);
      out = (level == 0 && k == 0) ? corner : concat(out, corner);
    }
  }
  return out;
}

CameraFrame make_camera_frame(const Value& r, const Value& theta, const Value& h) {
  CameraFrame f;
  f.position = vec3(r * cos(theta), r * sin(theta), h);
  f.forward = normalize(-f.position);  // gaze through the origin
  Value up_world = Value({0.0, 0.0, 1.0}, Shape{3});
  f.right = normalize(cross(f.forward, up_world));
  f.up = cross(f.right, f.forward);
  return f;
}

Camera make_camera_at(double r, double theta, double h) {
  if (!(r > 0)) throw Error("camera radius must be positive");
  CameraFrame f = make_camera_frame(Value(r), Value(theta), Value(h));
  auto arr = [](const Value& v) {
    return std::array<double, 3>{v[0], v[1], v[2]};
  };
  return Camera{arr(f.position), arr(f.right), arr(f.up), arr(f.forward), 1.0};
}

Value perspective_project(const CameraFrame& camera, const Value& corners) {
  Value out;
  for (int k = 0; k < 8; ++k) {
    Value rel = slice(corners, 3 * k, 3) - camera.position;
    Value depth = dot(rel, camera.forward);
    Value safe_depth = kDepthFloor + smooth_relu(depth - kDepthFloor);
    Value xy = concat(dot(rel, camera.right) / safe_depth, dot(rel, camera.up) / safe_depth);
    out = k == 0 ? xy : concat(out, xy);
  }
  return out;
}

ProjectedTable perspective_project(const Camera& camera, const TableBox& table) {
  Value corners = table_corners(Value({table.size.begin(), table.size.end()}, Shape{3}),
                                Value({table.pos.begin(), table.pos.end()}, Shape{2}));
  // reject corners at or behind the camera plane before the smooth floor
  Value pos({camera.position.begin(), camera.position.end()}, Shape{3});
  Value fwd({camera.forward.begin(), camera.forward.end()}, Shape{3});
  for (int k = 0; k < 8; ++k) {
    double depth = dot(slice(corners, 3 * k, 3) - pos, fwd).scalar();
    if (depth <= 0.0)
      throw Error("table corner " + std::to_string(k) + " is behind the camera (depth " +
                  std::to_string(depth) + ")");
  }
  CameraFrame f;
  f.position = pos;
  f.forward = fwd;
  f.right = Value({camera.right.begin(), camera.right.end()}, Shape{3});
  f.up = Value({camera.up.begin(), camera.up.end()}, Shape{3});
  Value v = perspective_project(f, corners);
  ProjectedTable p;
  p.vertices.assign(v.data().begin(), v.data().end());
  return p;
}

ProjectedTable project_scene_table(const TableScene& scene, int index) {
  Camera cam = make_camera_at(scene.r, scene.theta, scene.h);
  return perspective_project(cam, scene.tables[size_t(index)]);
}

ModelDefinition tables_model(int n_tables) {
  if (n_tables < 1) throw Error("tables_model needs at least one observed table");
  ModelBuilder b;
  b.sample("r", Shape::scalar(), uniform_dist(8.0, 16.0));
  b.sample("theta", Shape::scalar(), uniform_dist(0.0, kTwoPi));
  b.sample("h", Shape::scalar(), normal_dist(0.0, 3.0));
  for (int i = 0; i < n_tables; ++i) {
    b.sample("size" + std::to_string(i), Shape{3}, uniform_dist(0.5, 4.0));
    b.sample("pos" + std::to_string(i), Shape{2}, normal_dist(0.0, 2.0));
  }
  for (int i = 0; i < n_tables; ++i)
    b.observe("table" + std::to_string(i), ProjectedTable::shape(), 0.01);
  b.program([n_tables](const ProgramInputs& in) {
    CameraFrame cam = make_camera_frame(in.site("r"), in.site("theta"), in.site("h"));
    ProgramOutputs out;
    for (int i = 0; i < n_tables; ++i) {
      const Value& size = in.site("size" + std::to_string(i));
      const Value& pos = in.site("pos" + std::to_string(i));
      Value proj = perspective_project(cam, table_corners(size, pos));
      out.predictions.push_back(proj.reshaped(ProjectedTable::shape()));
      out.returns.push_back(size);
      out.return_names.push_back("size" + std::to_string(i));
      out.returns.push_back(pos);
      out.return_names.push_back("pos" + std::to_string(i));
    }
    return out;
  });
  return b.build();
}

std::vector<ObservationSite> tables_observations(std::span<const ProjectedTable> observed) {
  std::vector<ObservationSite> sites;
  for (size_t i = 0; i < observed.size(); ++i)
    sites.push_back({"table" + std::to_string(i), observed[i].vertices, 0.01});
  return sites;
}

std::vector<double> tables_step_scale(int n_tables) {
  const double logistic_sd = M_PI / std::sqrt(3.0);
  std::vector<double> s;
  s.push_back(logistic_sd);  // r
  s.push_back(logistic_sd);  // theta
  s.push_back(3.0);          // h
  for (int i = 0; i < n_tables; ++i) {
    for (int k = 0; k < 3; ++k) s.push_back(logistic_sd);
    for (int k = 0; k < 2; ++k) s.push_back(2.0);
  }
  return s;
}

TableScene decode_tables_stimulus(std::span<const double> u, int n_tables) {
  TableScene s;
  s.r = 8.0 + 8.0 * sigmoid(u[0]);
  s.theta = kTwoPi * sigmoid(u[1]);
  s.h = 3.0 * u[2];
  for (int i = 0; i < n_tables; ++i) {
    TableBox t;
    for (int k = 0; k < 3; ++k) t.size[size_t(k)] = 0.5 + 3.5 * sigmoid(u[size_t(3 + 5 * i + k)]);
    for (int k = 0; k < 2; ++k) t.pos[size_t(k)] = 2.0 * u[size_t(3 + 5 * i + 3 + k)];
    s.tables.push_back(t);
  }
  return s;
}

std::vector<double> encode_tables_stimulus(const TableScene& scene) {
  auto logit = [](double p) { return std::log(p) - std::log1p(-p); };
  std::vector<double> u;
  u.push_back(logit((scene.r - 8.0) / 8.0));
  u.push_back(logit(scene.theta / kTwoPi));
  u.push_back(scene.h / 3.0);
  for (const TableBox& t : scene.tables) {
    for (int k = 0; k < 3; ++k) u.push_back(logit((t.size[size_t(k)] - 0.5) / 3.5));
    for (int k = 0; k < 2; ++k) u.push_back(t.pos[size_t(k)] / 2.0);
  }
  return u;
}

std::vector<double> tables_initial_stimulus(const RandomKey& key, int n_tables) {
  RandomKey k = key;
  std::vector<double> u(size_t(3 + 5 * n_tables));
  for (double& x : u) x = 0.6 * k.normal();
  return u;
}

namespace {

struct TracedScene {
  CameraFrame camera;
  std::vector<Value> sizes;  // (3) each
  std::vector<Value> positions;  // (2) each
};

TracedScene trace_scene(const Value& u, int n_tables) {
  TracedScene s;
  Value r = 8.0 + 8.0 * sigmoid(index(u, 0));
  Value theta = kTwoPi * sigmoid(index(u, 1));
  Value h = 3.0 * index(u, 2);
  s.camera = make_camera_frame(r, theta, h);
  for (int i = 0; i < n_tables; ++i) {
    s.sizes.push_back(0.5 + 3.5 * sigmoid(slice(u, 3 + 5 * i, 3)));
    s.positions.push_back(2.0 * slice(u, 3 + 5 * i + 3, 2));
  }
  return s;
}

}  // namespace

std::shared_ptr<InferencePipeline> tables_pipeline(const TablesExperimentConfig& cfg) {
  const int k = cfg.n_tables;
  const int dim = 3 + 5 * k;

  CompiledFunction stimulus = CompiledFunction::trace({Shape{dim}}, [k](std::span<Value> in) {
    TracedScene s = trace_scene(in[0], k);
    std::vector<Value> projections;
    for (int i = 0; i < k; ++i)
      projections.push_back(
          perspective_project(s.camera, table_corners(s.sizes[size_t(i)], s.positions[size_t(i)])));
    return projections;
  });

  const double margin = cfg.depth_margin;
  const double weight = cfg.depth_penalty_weight;
  CompiledFunction loss =
      CompiledFunction::trace({Shape{dim}, Shape{5 * k}}, [k, margin, weight](std::span<Value> in) {
        TracedScene s = trace_scene(in[0], k);
        Value inferred_pos0 = slice(in[1], 3, 2);
        Value l = soft_norm(inferred_pos0) - soft_norm(s.positions[0]);
        // keep every true corner comfortably in front of the camera
        Value penalty(0.0);
        for (int i = 0; i < k; ++i) {
          Value corners = table_corners(s.sizes[size_t(i)], s.positions[size_t(i)]);
          for (int c = 0; c < 8; ++c) {
            Value rel = slice(corners, 3 * c, 3) - s.camera.position;
            Value gap = smooth_relu(margin - dot(rel, s.camera.forward));
            penalty = penalty + gap * gap;
          }
        }
        return std::vector<Value>{l + weight * penalty};
      });

  std::vector<ProjectedTable> blanks(size_t(k), ProjectedTable{std::vector<double>(16, 0.0)});
  auto sampler =
      std::make_unique<HmcSampler>(tables_model(k), tables_observations(blanks),
                                   std::vector<std::vector<double>>{}, tables_step_scale(k),
                                   cfg.init);
  return std::make_shared<InferencePipeline>(std::move(stimulus), std::move(loss),
                                             std::move(sampler), cfg.hmc);
}

Objective tables_objective(const TablesExperimentConfig& cfg) {
  return InferencePipeline::objective(tables_pipeline(cfg));
}

double tables_loss(const TableScene& scene, const TablesExperimentConfig& cfg,
                   const RandomKey& key) {
  if (int(scene.tables.size()) != cfg.n_tables)
    throw Error("scene table count does not match the experiment config");
  auto pipeline = tables_pipeline(cfg);
  std::vector<double> u = encode_tables_stimulus(scene);
  return pipeline->value(u, key);
}

}  // namespace dppl::models
