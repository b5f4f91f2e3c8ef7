#include "facadewin/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <json.hpp>
#include <set>

#include "facadewin/errors.hpp"
#include "facadewin/rng.hpp"

namespace facadewin {

using nlohmann::json;

std::string CropSpec::image_id() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "_c%03d", index);
    return parent_id + buf;
}

namespace {

std::vector<int> axis_origins(int dim, int side) {
    const int stride = static_cast<int>((9 * side + 9) / 10);  // ceil(0.9 * side)
    std::vector<int> origins;
    for (int o = 0; o + side <= dim; o += stride) {
        origins.push_back(o);
    }
    const int last = dim - side;
    if (origins.empty() || origins.back() != last) origins.push_back(last);
    return origins;
}

}  // namespace

std::vector<CropSpec> adaptive_crops(int width, int height, int side,
                                     const std::string& parent_id) {
    if (side < 1) throw Error("crop side must be positive");
    if (width < side || height < side) {
        throw Error("image too small to crop");
    }
    const auto xs = axis_origins(width, side);
    const auto ys = axis_origins(height, side);
    std::vector<CropSpec> crops;
    crops.reserve(xs.size() * ys.size());
    int index = 0;
    for (const int y : ys) {
        for (const int x : xs) {
            crops.push_back(CropSpec{parent_id, x, y, side, index++});
        }
    }
    return crops;
}

std::vector<WindowAnnotation> crop_annotations(const std::vector<WindowAnnotation>& annotations,
                                               const CropSpec& crop, double min_visible,
                                               const std::string& crop_image_id) {
    const BBox window = crop.window();
    const std::string target_id = crop_image_id.empty() ? crop.image_id() : crop_image_id;
    std::vector<WindowAnnotation> kept;
    for (const auto& ann : annotations) {
        const std::uint64_t original_area = ann.mask.popcount();
        BinaryMask clipped = crop_mask(ann.mask, window);
        const std::uint64_t visible = clipped.popcount();
        if (visible == 0) continue;
        if (static_cast<double>(visible) <
            min_visible * static_cast<double>(original_area)) {
            continue;
        }
        WindowAnnotation out;
        out.image_id = target_id;
        out.mask = std::move(clipped);
        out.bbox = out.mask.tight_bbox();
        out.class_label = ann.class_label;
        kept.push_back(std::move(out));
    }
    return kept;
}

TextureImage crop_image(const TextureImage& image, const CropSpec& crop) {
    image.validate();
    if (crop.origin_x < 0 || crop.origin_y < 0 || crop.origin_x + crop.side > image.width ||
        crop.origin_y + crop.side > image.height) {
        throw Error("crop window leaves the parent image");
    }
    TextureImage out;
    out.id = crop.image_id();
    out.width = crop.side;
    out.height = crop.side;
    out.source = image.id;
    out.pixels.resize(static_cast<std::size_t>(crop.side) * crop.side * 3);
    for (int y = 0; y < crop.side; ++y) {
        const std::uint8_t* src = image.at(crop.origin_x, crop.origin_y + y);
        std::copy(src, src + static_cast<std::size_t>(crop.side) * 3,
                  out.pixels.begin() + static_cast<std::size_t>(y) * crop.side * 3);
    }
    return out;
}

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

double luma_real(const std::uint8_t* px) {
    return kLumaR * px[0] + kLumaG * px[1] + kLumaB * px[2];
}

// Rounds the blue channel first, then compensates the luminance error in
// red and finally green (the heaviest weight). The residual luminance
// error is below half a level, so the output's rounded luminance equals
// the remapped level exactly and the remap's monotonicity survives
// quantization.
std::array<std::uint8_t, 3> quantize_to_luma(double r, double g, double b) {
    const long bi = std::lround(b);
    const double err_b = (static_cast<double>(bi) - b) * kLumaB;
    const double r_shifted = r - err_b / kLumaR;
    const long ri = std::lround(r_shifted);
    const double err_r = (static_cast<double>(ri) - r_shifted) * kLumaR;
    const double g_shifted = g - (err_b + err_r) / kLumaG;
    const long gi = std::lround(g_shifted);
    auto clamp8 = [](long v) {
        return static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
    };
    return {clamp8(ri), clamp8(gi), clamp8(bi)};
}

}  // namespace

std::vector<std::uint8_t> equalization_lut(const TextureImage& image) {
    image.validate();
    std::array<std::uint64_t, 256> hist{};
    const std::size_t n_pixels = static_cast<std::size_t>(image.width) * image.height;
    for (std::size_t i = 0; i < n_pixels; ++i) {
        const std::uint8_t* px = image.pixels.data() + i * 3;
        hist[luma601(px[0], px[1], px[2])]++;
    }
    std::array<std::uint64_t, 256> cdf{};
    std::uint64_t running = 0;
    std::uint64_t cdf_min = 0;
    for (int v = 0; v < 256; ++v) {
        running += hist[v];
        cdf[v] = running;
        if (cdf_min == 0 && hist[v] > 0) cdf_min = hist[v];
    }
    std::vector<std::uint8_t> lut(256);
    const std::uint64_t total = n_pixels;
    if (total == cdf_min) {
        // Single occupied luminance bin: identity.
        for (int v = 0; v < 256; ++v) lut[v] = static_cast<std::uint8_t>(v);
        return lut;
    }
    const double denom = static_cast<double>(total - cdf_min);
    for (int v = 0; v < 256; ++v) {
        const double num = cdf[v] >= cdf_min ? static_cast<double>(cdf[v] - cdf_min) : 0.0;
        lut[v] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(num / denom * 255.0), 0, 255));
    }
    return lut;
}

TextureImage equalize_histogram(const TextureImage& image) {
    image.validate();
    const auto lut = equalization_lut(image);
    bool identity = true;
    for (int v = 0; v < 256 && identity; ++v) identity = lut[v] == v;
    if (identity) return image;

    TextureImage out = image;
    const std::size_t n_pixels = static_cast<std::size_t>(image.width) * image.height;
    for (std::size_t i = 0; i < n_pixels; ++i) {
        const std::uint8_t* px = image.pixels.data() + i * 3;
        const double y_in = luma_real(px);
        const std::uint8_t bin = luma601(px[0], px[1], px[2]);
        const double y_out = lut[bin];
        // Chroma offsets have zero luminance (the weights sum to 1), so any
        // scale k keeps the luminance at y_out; k shrinks only as far as the
        // RGB cube requires.
        const double d[3] = {px[0] - y_in, px[1] - y_in, px[2] - y_in};
        double k = 1.0;
        for (const double dc : d) {
            if (dc > 0.0) k = std::min(k, (255.0 - y_out) / dc);
            else if (dc < 0.0) k = std::min(k, y_out / -dc);
        }
        k = std::max(k, 0.0);
        const auto q = quantize_to_luma(y_out + k * d[0], y_out + k * d[1], y_out + k * d[2]);
        std::uint8_t* dst = out.pixels.data() + i * 3;
        dst[0] = q[0];
        dst[1] = q[1];
        dst[2] = q[2];
    }
    return out;
}

TextureImage rotate90_image(const TextureImage& image, int quarter_turns) {
    image.validate();
    if (image.width != image.height) {
        throw Error("rotation requires a square image");
    }
    const int k = ((quarter_turns % 4) + 4) % 4;
    if (k == 0) return image;
    TextureImage out = image;
    const int side = image.width;
    TextureImage src = image;
    for (int turn = 0; turn < k; ++turn) {
        // Clockwise: destination (side - 1 - y, x) takes source (x, y).
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                const std::uint8_t* s = src.at(x, y);
                std::uint8_t* d = out.at(side - 1 - y, x);
                d[0] = s[0];
                d[1] = s[1];
                d[2] = s[2];
            }
        }
        if (turn + 1 < k) src = out;
    }
    return out;
}

WindowAnnotation rotate90_annotation(const WindowAnnotation& annotation, int side,
                                     int quarter_turns, const std::string& new_image_id) {
    const int k = ((quarter_turns % 4) + 4) % 4;
    WindowAnnotation out = annotation;
    out.image_id = new_image_id.empty() ? annotation.image_id : new_image_id;
    for (int turn = 0; turn < k; ++turn) {
        const BBox b = out.bbox;
        out.bbox = BBox{side - b.y - b.h, b.x, b.h, b.w};
    }
    out.mask = rotate90_mask(annotation.mask, k);
    return out;
}

std::vector<RotatedVariant> rotate90_augment(const TextureImage& image,
                                             const std::vector<WindowAnnotation>& annotations) {
    if (image.width != image.height) {
        throw Error("rotation requires a square image");
    }
    std::vector<RotatedVariant> variants;
    variants.reserve(4);
    for (int k = 0; k < 4; ++k) {
        RotatedVariant v;
        v.quarter_turns = k;
        v.image = rotate90_image(image, k);
        v.image.id = image.id + "_r" + std::to_string(k);
        v.image.source = image.source;
        for (const auto& ann : annotations) {
            v.annotations.push_back(rotate90_annotation(ann, image.width, k, v.image.id));
        }
        variants.push_back(std::move(v));
    }
    return variants;
}

DatasetSplit split_dataset(std::vector<std::string> ids, std::uint64_t seed) {
    if (ids.empty()) throw Error("split: no ids");
    {
        std::set<std::string> unique(ids.begin(), ids.end());
        if (unique.size() != ids.size()) throw Error("split: duplicate ids");
    }
    DetRng rng(seed);
    rng.shuffle(ids);
    const std::size_t n = ids.size();
    const std::size_t n_train = n * 6 / 10;
    const std::size_t n_val = n * 2 / 10;
    DatasetSplit split;
    split.seed = seed;
    split.train.assign(ids.begin(), ids.begin() + n_train);
    split.val.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
    split.test.assign(ids.begin() + n_train + n_val, ids.end());
    return split;
}

DatasetSplit split_dataset_grouped(
    const std::vector<std::pair<std::string, std::string>>& id_and_group, std::uint64_t seed) {
    if (id_and_group.empty()) throw Error("split: no ids");
    std::vector<std::string> groups;
    for (const auto& [id, group] : id_and_group) {
        (void)id;
        if (std::find(groups.begin(), groups.end(), group) == groups.end()) {
            groups.push_back(group);
        }
    }
    const DatasetSplit group_split = split_dataset(groups, seed);
    auto bucket_of = [&](const std::string& group) -> int {
        for (const auto& g : group_split.train)
            if (g == group) return 0;
        for (const auto& g : group_split.val)
            if (g == group) return 1;
        return 2;
    };
    DatasetSplit split;
    split.seed = seed;
    std::set<std::string> seen;
    for (const auto& [id, group] : id_and_group) {
        if (!seen.insert(id).second) throw Error("split: duplicate ids");
        switch (bucket_of(group)) {
            case 0: split.train.push_back(id); break;
            case 1: split.val.push_back(id); break;
            default: split.test.push_back(id); break;
        }
    }
    return split;
}

std::string split_to_json(const DatasetSplit& split) {
    const json doc{{"train", split.train}, {"val", split.val}, {"test", split.test},
                   {"seed", split.seed}};
    return doc.dump(2) + "\n";
}

DatasetSplit split_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
    DatasetSplit split;
    split.train = doc.at("train").get<std::vector<std::string>>();
    split.val = doc.at("val").get<std::vector<std::string>>();
    split.test = doc.at("test").get<std::vector<std::string>>();
    split.seed = doc.value("seed", 0ULL);
    return split;
}

std::string crops_to_json(const std::vector<CropSpec>& crops) {
    json arr = json::array();
    for (const auto& crop : crops) {
        arr.push_back(json{{"parent_id", crop.parent_id},
                           {"origin_x", crop.origin_x},
                           {"origin_y", crop.origin_y},
                           {"side", crop.side},
                           {"index", crop.index}});
    }
    return arr.dump(2) + "\n";
}

std::vector<CropSpec> crops_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
    std::vector<CropSpec> crops;
    for (const auto& node : doc) {
        crops.push_back(CropSpec{node.at("parent_id").get<std::string>(),
                                 node.at("origin_x").get<int>(), node.at("origin_y").get<int>(),
                                 node.at("side").get<int>(), node.at("index").get<int>()});
    }
    return crops;
}

}  // namespace facadewin
