#include "dppl/models/color.hpp"

#include <cmath>

namespace dppl::models {

namespace {

Value render_object(const Value& light, const Value& albedo) {
  Value base = light * albedo;
  Value img = base * kFaceShading[0];
  for (size_t f = 1; f < kFaceShading.size(); ++f) img = concat(img, base * kFaceShading[f]);
  return img;
}

}  // namespace

Value render_patches(const Value& light, const Value& color1, const Value& color2) {
  if (light.size() != 3 || color1.size() != 3 || color2.size() != 3)
    throw ShapeError("render_patches expects RGB triples");
  return concat(render_object(light, color1), render_object(light, color2))
      .reshaped(PatchImage::shape());
}

PatchImage render_patches(const ColorScene& scene) {
  auto light_arr = planck_to_rgb(scene.temp);
  std::vector<double> light(light_arr.begin(), light_arr.end());
  for (double& c : light) c *= scene.brightness;
  Value img = render_patches(Value(light, Shape{3}),
                             Value({scene.color1.begin(), scene.color1.end()}, Shape{3}),
                             Value({scene.color2.begin(), scene.color2.end()}, Shape{3}));
  return PatchImage{{img.data().begin(), img.data().end()}};
}

ModelDefinition color_model() {
  ModelBuilder b;
  b.sample("temp", Shape::scalar(), normal_dist(6500.0, 1000.0));
  b.sample("brightness", Shape::scalar(), uniform_dist(0.0, 2.0));
  b.sample("color1", Shape{3}, uniform_dist(0.0, 1.0));
  b.sample("color2", Shape{3}, uniform_dist(0.0, 1.0));
  b.observe("img", PatchImage::shape(), 0.1);
  b.program([](const ProgramInputs& in) {
    Value light = planck_to_rgb(in.site("temp")) * in.site("brightness");
    ProgramOutputs out;
    out.predictions = {render_patches(light, in.site("color1"), in.site("color2"))};
    out.returns = {in.site("color1"), in.site("color2")};
    out.return_names = {"color1", "color2"};
    return out;
  });
  return b.build();
}

ObservationSite color_observation(const PatchImage& observed) {
  return {"img", observed.pixels, 0.1};
}

std::vector<double> color_step_scale() {
  const double logistic_sd = M_PI / std::sqrt(3.0);  // unconstrained Uniform prior scale
  std::vector<double> s(8, logistic_sd);
  s[0] = 1000.0;  // temp is sampled on the kelvin scale
  return s;
}

ColorScene decode_color_stimulus(std::span<const double> u) {
  ColorScene s;
  s.temp = 6500.0 + 2500.0 * std::tanh(u[0]);
  s.brightness = 2.0 * sigmoid(u[1]);
  for (int c = 0; c < 3; ++c) s.color1[size_t(c)] = sigmoid(u[size_t(2 + c)]);
  for (int c = 0; c < 3; ++c) s.color2[size_t(c)] = sigmoid(u[size_t(5 + c)]);
  return s;
}

std::vector<double> encode_color_stimulus(const ColorScene& scene) {
  auto logit_d = [](double p) { return std::log(p) - std::log1p(-p); };
  std::vector<double> u(8);
  u[0] = std::atanh((scene.temp - 6500.0) / 2500.0);
  u[1] = logit_d(scene.brightness / 2.0);
  for (int c = 0; c < 3; ++c) u[size_t(2 + c)] = logit_d(scene.color1[size_t(c)]);
  for (int c = 0; c < 3; ++c) u[size_t(5 + c)] = logit_d(scene.color2[size_t(c)]);
  return u;
}

std::vector<double> color_initial_stimulus(const RandomKey& key) {
  RandomKey k = key;
  std::vector<double> u(8);
  for (double& x : u) x = 0.6 * k.normal();
  return u;
}

namespace {

// traced stimulus map: u -> rendered observation
Value trace_stimulus_image(const Value& u) {
  Value temp = 6500.0 + 2500.0 * tanh(index(u, 0));
  Value brightness = 2.0 * sigmoid(index(u, 1));
  Value c1 = sigmoid(slice(u, 2, 3));
  Value c2 = sigmoid(slice(u, 5, 3));
  Value light = planck_to_rgb(temp) * brightness;
  return render_patches(light, c1, c2);
}

}  // namespace

std::shared_ptr<InferencePipeline> color_pipeline(const ColorExperimentConfig& cfg) {
  CompiledFunction stimulus = CompiledFunction::trace({Shape{8}}, [](std::span<Value> in) {
    return std::vector<Value>{trace_stimulus_image(in[0])};
  });

  const double lambda = cfg.lambda_distinct;
  CompiledFunction loss =
      CompiledFunction::trace({Shape{8}, Shape{6}}, [lambda](std::span<Value> in) {
        Value c1 = sigmoid(slice(in[0], 2, 3));
        Value c2 = sigmoid(slice(in[0], 5, 3));
        Value inferred1 = slice(in[1], 0, 3);
        Value inferred2 = slice(in[1], 3, 3);
        Value l = -soft_norm(c1 - inferred1) - soft_norm(c2 - inferred2) -
                  lambda * soft_norm(c1 - c2);
        return std::vector<Value>{l};
      });

  PatchImage blank{std::vector<double>(18, 0.0)};
  auto sampler = std::make_unique<HmcSampler>(
      color_model(), std::vector<ObservationSite>{color_observation(blank)},
      std::vector<std::vector<double>>{}, color_step_scale(), cfg.init);
  return std::make_shared<InferencePipeline>(std::move(stimulus), std::move(loss),
                                             std::move(sampler), cfg.hmc);
}

Objective color_objective(const ColorExperimentConfig& cfg) {
  return InferencePipeline::objective(color_pipeline(cfg));
}

double color_loss(const ColorScene& scene, const ColorExperimentConfig& cfg,
                  const RandomKey& key) {
  auto pipeline = color_pipeline(cfg);
  std::vector<double> u = encode_color_stimulus(scene);
  return pipeline->value(u, key);
}

}  // namespace dppl::models
