#pragma once

#include <array>

#include "dppl/pipeline.hpp"

namespace dppl::models {

// A two-object scene under a single black-body light source.
struct ColorScene {
  double temp = 6500.0;       // color temperature, kelvin
  double brightness = 1.0;    // in [0, 2]
  std::array<double, 3> color1{0.5, 0.5, 0.5};  // RGB albedos in [0,1]
  std::array<double, 3> color2{0.5, 0.5, 0.5};
};

// Rendered image: 2 objects x 3 faces x 3 channels, flattened.
struct PatchImage {
  std::vector<double> pixels;  // size 18
  static Shape shape() { return Shape{2, 3, 3}; }
};

// Fixed per-face Lambertian shading coefficients (a wedge's facets).
inline constexpr std::array<double, 3> kFaceShading{1.0, 0.8, 0.6};

// Smooth fit of black-body light color (linear RGB, unit max channel at
// 6500K) over [1000K, 12000K]. Everywhere differentiable; the eager double
// overload enforces the fitted range.
Value planck_to_rgb(const Value& temp);
std::array<double, 3> planck_to_rgb(double temp);

// pixel[o,f,c] = light[c] * albedo_o[c] * shading[f]
Value render_patches(const Value& light, const Value& color1, const Value& color2);
PatchImage render_patches(const ColorScene& scene);

// Latents: temp ~ N(6500,1000), brightness ~ U(0,2), color1/2 ~ U(0,1)^3;
// the rendered image is observed with pixelwise noise 0.1; returns
// (color1, color2).
ModelDefinition color_model();
ObservationSite color_observation(const PatchImage& observed);

// Per-dimension HMC step scaling from the prior scales (kelvin-range temp
// next to unit-range logits is far too stiff for a single step size).
std::vector<double> color_step_scale();

struct ColorExperimentConfig {
  HmcHyperparams hmc{300, 48, 0.025, 60};
  ChainInit init{4, 10};
  double lambda_distinct = 0.5;  // weight of the color-separation term
};

// Smooth bounded stimulus parameterization, 8 unconstrained numbers:
//   temp = 6500 + 2500 tanh(u0), brightness = 2 sigmoid(u1),
//   colors = sigmoid(u2..u7).
// Keeps every optimized scene renderable (albedos in [0,1], temp inside the
// planck fit).
ColorScene decode_color_stimulus(std::span<const double> u);
std::vector<double> encode_color_stimulus(const ColorScene& scene);
std::vector<double> color_initial_stimulus(const RandomKey& key);

// loss = -|c1 - inferred1| - |c2 - inferred2| - lambda |c1 - c2|, softened
// norms, colors inferred from the scene's rendering.
std::shared_ptr<InferencePipeline> color_pipeline(const ColorExperimentConfig& cfg);
Objective color_objective(const ColorExperimentConfig& cfg);
double color_loss(const ColorScene& scene, const ColorExperimentConfig& cfg, const RandomKey& key);

}  // namespace dppl::models
