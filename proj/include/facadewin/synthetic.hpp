#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "facadewin/annotations.hpp"
#include "facadewin/image.hpp"

namespace facadewin {

/// A grid-of-windows facade with the variation axes real textures show:
/// exposure (gamma), a partial shadow band, and horizontal shear.
struct FacadeSceneSpec {
    std::string id = "scene";
    int image_side = 128;
    int rows = 4;
    int cols = 4;
    int window_w = 12;
    int window_h = 12;
    int margin = 8;
    int spacing = 8;
    double gamma = 1.0;            // exposure exponent, > 0
    double shadow_fraction = 0.0;  // leftmost fraction of columns darkened
    double shear = 0.0;            // horizontal shear factor
    std::uint64_t seed = 0;

    void validate() const;
};

struct FacadeScene {
    TextureImage image;
    std::vector<WindowAnnotation> annotations;
};

/// Renders the scene and its exact ground truth. Shear moves whole pixel
/// rows (no resampling), so masks stay pixel-exact; gamma and shadow touch
/// intensities only, never geometry. Wall and window shades derive from
/// the seed. Throws on a grid that does not fit or a shear that pushes a
/// window fully outside the image.
FacadeScene generate_facade(const FacadeSceneSpec& spec);

/// Noise model for a simulated detector over known ground truth.
struct DetectorNoiseSpec {
    double drop_prob = 0.0;
    double dup_prob = 0.0;
    int jitter_px = 0;
    double score_lo = 0.9;
    double score_hi = 0.9;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One pass over the ground truth: each window is dropped with drop_prob,
/// otherwise emitted with per-edge uniform jitter and a uniform score; with
/// dup_prob an extra jittered duplicate follows. Detection masks are the
/// filled detection boxes. Deterministic under the seed.
std::vector<Detection> simulate_detector(const std::vector<WindowAnnotation>& gts,
                                         const DetectorNoiseSpec& noise);

std::string scene_specs_to_json(const std::vector<FacadeSceneSpec>& specs);
/// Accepts a single spec object or an array of them.
std::vector<FacadeSceneSpec> scene_specs_from_json(const std::string& text);

std::string noise_spec_to_json(const DetectorNoiseSpec& spec);
DetectorNoiseSpec noise_spec_from_json(const std::string& text);

}  // namespace facadewin
