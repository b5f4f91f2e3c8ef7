#include "facadewin/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <json.hpp>

#include "facadewin/errors.hpp"
#include "facadewin/rng.hpp"

namespace facadewin {

using nlohmann::json;

void FacadeSceneSpec::validate() const {
    if (image_side < 1) throw Error("scene: image side must be positive");
    if (rows < 1 || cols < 1) throw Error("scene: grid must be at least 1x1");
    if (window_w < 1 || window_h < 1) throw Error("scene: window extent must be positive");
    if (margin < 0 || spacing < 0) throw Error("scene: margin and spacing must be non-negative");
    if (!(gamma > 0.0)) throw Error("scene: gamma must be positive");
    if (!(shadow_fraction >= 0.0 && shadow_fraction <= 1.0)) {
        throw Error("scene: shadow fraction outside [0, 1]");
    }
    if (!std::isfinite(shear)) throw Error("scene: shear must be finite");
    const long long grid_w = 2LL * margin + static_cast<long long>(cols) * window_w +
                             static_cast<long long>(cols - 1) * spacing;
    const long long grid_h = 2LL * margin + static_cast<long long>(rows) * window_h +
                             static_cast<long long>(rows - 1) * spacing;
    if (grid_w > image_side || grid_h > image_side) {
        throw Error("scene: grid overflow, windows do not fit inside the image");
    }
}

FacadeScene generate_facade(const FacadeSceneSpec& spec) {
    spec.validate();
    DetRng rng(spec.seed);
    const std::uint8_t wall = static_cast<std::uint8_t>(160 + rng.bounded(61));
    const std::uint8_t glass = static_cast<std::uint8_t>(20 + rng.bounded(51));
    const int side = spec.image_side;

    // Row shift table for the shear, shared by pixels and masks.
    std::vector<int> shift(side);
    for (int y = 0; y < side; ++y) {
        shift[y] = static_cast<int>(std::lround(spec.shear * y));
    }

    FacadeScene scene;
    scene.image = TextureImage::filled(spec.id, side, side, wall, wall, wall);
    scene.image.source = "synthetic";

    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const int x0 = spec.margin + c * (spec.window_w + spec.spacing);
            const int y0 = spec.margin + r * (spec.window_h + spec.spacing);
            std::vector<std::uint8_t> dense(static_cast<std::size_t>(side) * side, 0);
            for (int y = y0; y < y0 + spec.window_h; ++y) {
                for (int x = x0; x < x0 + spec.window_w; ++x) {
                    const int sx = x + shift[y];
                    if (sx < 0 || sx >= side) continue;
                    dense[static_cast<std::size_t>(sx) * side + y] = 1;
                    std::uint8_t* px = scene.image.at(sx, y);
                    px[0] = glass;
                    px[1] = glass;
                    px[2] = glass;
                }
            }
            WindowAnnotation ann;
            ann.image_id = spec.id;
            ann.mask = BinaryMask::encode(side, side, dense);
            if (ann.mask.popcount() == 0) {
                throw Error("scene: shear pushes a window outside the image");
            }
            ann.bbox = ann.mask.tight_bbox();
            scene.annotations.push_back(std::move(ann));
        }
    }

    // Exposure and shadow act after layout, so the geometry above is
    // already final.
    std::array<std::uint8_t, 256> gamma_lut;
    for (int v = 0; v < 256; ++v) {
        const double out = 255.0 * std::pow(static_cast<double>(v) / 255.0, spec.gamma);
        gamma_lut[v] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(out), 0, 255));
    }
    const int shadow_cols = static_cast<int>(std::floor(spec.shadow_fraction * side));
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            std::uint8_t* px = scene.image.at(x, y);
            for (int ch = 0; ch < 3; ++ch) {
                std::uint8_t v = gamma_lut[px[ch]];
                if (x < shadow_cols) v = static_cast<std::uint8_t>(v / 2);
                px[ch] = v;
            }
        }
    }
    return scene;
}

void DetectorNoiseSpec::validate() const {
    if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) throw Error("noise: drop_prob outside [0, 1]");
    if (!(dup_prob >= 0.0 && dup_prob <= 1.0)) throw Error("noise: dup_prob outside [0, 1]");
    if (jitter_px < 0) throw Error("noise: jitter must be non-negative");
    if (!(score_lo >= 0.0 && score_hi <= 1.0 && score_lo <= score_hi)) {
        throw Error("noise: score range must satisfy 0 <= lo <= hi <= 1");
    }
}

namespace {

BBox jitter_box(const BBox& box, int jitter, int image_w, int image_h, DetRng& rng) {
    // Each edge moves independently by up to jitter pixels.
    int x0 = box.x + rng.uniform_int(-jitter, jitter);
    int y0 = box.y + rng.uniform_int(-jitter, jitter);
    int x1 = box.x + box.w + rng.uniform_int(-jitter, jitter);
    int y1 = box.y + box.h + rng.uniform_int(-jitter, jitter);
    x0 = std::clamp(x0, 0, image_w - 1);
    y0 = std::clamp(y0, 0, image_h - 1);
    x1 = std::clamp(x1, x0 + 1, image_w);
    y1 = std::clamp(y1, y0 + 1, image_h);
    return BBox{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

std::vector<Detection> simulate_detector(const std::vector<WindowAnnotation>& gts,
                                         const DetectorNoiseSpec& noise) {
    noise.validate();
    DetRng rng(noise.seed);
    std::vector<Detection> dets;
    dets.reserve(gts.size());
    for (const auto& gt : gts) {
        if (rng.next_double() < noise.drop_prob) continue;
        const int image_w = gt.mask.width;
        const int image_h = gt.mask.height;
        auto emit = [&]() {
            Detection det;
            det.image_id = gt.image_id;
            det.bbox = jitter_box(gt.bbox, noise.jitter_px, image_w, image_h, rng);
            det.mask = mask_from_box(image_w, image_h, det.bbox);
            det.score = rng.uniform(noise.score_lo, noise.score_hi);
            dets.push_back(std::move(det));
        };
        emit();
        if (rng.next_double() < noise.dup_prob) emit();
    }
    return dets;
}

namespace {

FacadeSceneSpec scene_spec_from_node(const json& node) {
    FacadeSceneSpec spec;
    spec.id = node.value("id", spec.id);
    spec.image_side = node.value("image_side", spec.image_side);
    spec.rows = node.value("rows", spec.rows);
    spec.cols = node.value("cols", spec.cols);
    spec.window_w = node.value("window_w", spec.window_w);
    spec.window_h = node.value("window_h", spec.window_h);
    spec.margin = node.value("margin", spec.margin);
    spec.spacing = node.value("spacing", spec.spacing);
    spec.gamma = node.value("gamma", spec.gamma);
    spec.shadow_fraction = node.value("shadow_fraction", spec.shadow_fraction);
    spec.shear = node.value("shear", spec.shear);
    spec.seed = node.value("seed", spec.seed);
    spec.validate();
    return spec;
}

json scene_spec_to_node(const FacadeSceneSpec& spec) {
    return json{{"id", spec.id},
                {"image_side", spec.image_side},
                {"rows", spec.rows},
                {"cols", spec.cols},
                {"window_w", spec.window_w},
                {"window_h", spec.window_h},
                {"margin", spec.margin},
                {"spacing", spec.spacing},
                {"gamma", spec.gamma},
                {"shadow_fraction", spec.shadow_fraction},
                {"shear", spec.shear},
                {"seed", spec.seed}};
}

}  // namespace

std::string scene_specs_to_json(const std::vector<FacadeSceneSpec>& specs) {
    if (specs.size() == 1) return scene_spec_to_node(specs.front()).dump(2) + "\n";
    json arr = json::array();
    for (const auto& spec : specs) arr.push_back(scene_spec_to_node(spec));
    return arr.dump(2) + "\n";
}

std::vector<FacadeSceneSpec> scene_specs_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
    std::vector<FacadeSceneSpec> specs;
    if (doc.is_array()) {
        for (const auto& node : doc) specs.push_back(scene_spec_from_node(node));
    } else {
        specs.push_back(scene_spec_from_node(doc));
    }
    return specs;
}

std::string noise_spec_to_json(const DetectorNoiseSpec& spec) {
    const json doc{{"drop_prob", spec.drop_prob},   {"dup_prob", spec.dup_prob},
                   {"jitter_px", spec.jitter_px},   {"score_lo", spec.score_lo},
                   {"score_hi", spec.score_hi},     {"seed", spec.seed}};
    return doc.dump(2) + "\n";
}

DetectorNoiseSpec noise_spec_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
    DetectorNoiseSpec spec;
    spec.drop_prob = doc.value("drop_prob", spec.drop_prob);
    spec.dup_prob = doc.value("dup_prob", spec.dup_prob);
    spec.jitter_px = doc.value("jitter_px", spec.jitter_px);
    spec.score_lo = doc.value("score_lo", spec.score_lo);
    spec.score_hi = doc.value("score_hi", spec.score_hi);
    spec.seed = doc.value("seed", spec.seed);
    spec.validate();
    return spec;
}

}  // namespace facadewin
