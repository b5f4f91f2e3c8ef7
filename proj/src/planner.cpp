#include "facadewin/planner.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "facadewin/errors.hpp"

namespace facadewin {

using nlohmann::json;

namespace {

double quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw Error("quantile of empty sample");
    if (sorted.size() == 1) return sorted.front();
    const double rank = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    const double frac = rank - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

void DatasetStats::validate() const {
    if (m < 2 || m > 5 || image_side != (1024 >> m)) {
        throw Error("stats: image side must be 1024 / 2^m with m in {2..5}");
    }
    if (!window_width.ordered() || !aspect.ordered()) {
        throw Error("stats: quantiles out of order");
    }
    if (mean_windows_per_image < 0.0) {
        throw Error("stats: negative mean windows per image");
    }
}

DatasetStats stats_from_annotations(const AnnotationSet& set) {
    if (set.images.empty()) throw Error("stats: no images");
    const int side = set.images.front().width;
    for (const auto& img : set.images) {
        if (img.width != side || img.height != side) {
            throw Error("stats: images must share one square side");
        }
    }
    if (set.annotations.empty()) throw Error("stats: no annotations");

    std::vector<double> widths, aspects;
    widths.reserve(set.annotations.size());
    aspects.reserve(set.annotations.size());
    double width_sum = 0.0;
    for (const auto& ann : set.annotations) {
        const double w = std::sqrt(static_cast<double>(ann.bbox.area()));
        widths.push_back(w);
        width_sum += w;
        aspects.push_back(static_cast<double>(ann.bbox.h) / static_cast<double>(ann.bbox.w));
    }
    std::sort(widths.begin(), widths.end());
    std::sort(aspects.begin(), aspects.end());

    DatasetStats stats;
    stats.image_side = side;
    int m = 0;
    for (int candidate = 2; candidate <= 5; ++candidate) {
        if ((1024 >> candidate) == side) m = candidate;
    }
    if (m == 0) throw Error("stats: image side must be 1024 / 2^m with m in {2..5}");
    stats.m = m;
    stats.window_width = {quantile(widths, 0.25), quantile(widths, 0.5), quantile(widths, 0.75)};
    stats.aspect = {quantile(aspects, 0.25), quantile(aspects, 0.5), quantile(aspects, 0.75)};
    stats.mean_windows_per_image =
        static_cast<double>(set.annotations.size()) / static_cast<double>(set.images.size());
    stats.object_fraction = width_sum / static_cast<double>(set.annotations.size()) / side;
    return stats;
}

void NetworkConfig::validate() const {
    if (input_side < 1) throw Error("config: input side must be positive");
    if (k_layer < 1 || k_layer > 5) throw Error("config: k_layer outside [1, 5]");
    if (anchor_scales.empty() || anchor_ratios.empty()) {
        throw Error("config: anchors missing");
    }
    for (std::size_t i = 0; i < anchor_scales.size(); ++i) {
        if (anchor_scales[i] < 4) throw Error("config: anchor scale below 4 px");
        if (i > 0 && anchor_scales[i] <= anchor_scales[i - 1]) {
            throw Error("config: anchor scales must be strictly ascending");
        }
    }
    if (rois_per_image < 1) throw Error("config: rois_per_image must be positive");
    if (!(p_min >= 0.0 && p_min <= 1.0)) throw Error("config: p_min outside [0, 1]");
    const auto k = loss_weights.as_array();
    double sum = 0.0;
    for (const double v : k) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error("config: loss weights must be finite and non-negative");
        sum += v;
    }
    if (sum == 0.0) throw Error("config: loss weights all zero");
}

double estimate_object_width(double image_side, double fraction) {
    if (image_side < 1.0) throw Error("estimate: image side must be >= 1");
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error("estimate: fraction outside (0, 1)");
    return fraction * image_side;
}

int plan_depth(double object_width) {
    if (!(object_width > 0.0)) throw Error("plan_depth: object width must be positive");
    int best = 0;
    for (int k = 1; k <= 5; ++k) {
        if (object_width / static_cast<double>(1 << k) > 3.0) {
            best = k;
        } else {
            break;
        }
    }
    if (best == 0) throw Error("objects too small for any downsampling");
    return best;
}

AnchorPlan plan_anchors(const DatasetStats& stats) {
    if (!stats.window_width.ordered() || !stats.aspect.ordered()) {
        throw Error("plan_anchors: quantiles out of order");
    }
    AnchorPlan plan;
    for (const double q : {stats.window_width.q25, stats.window_width.q50, stats.window_width.q75}) {
        const int scale = std::max(4, static_cast<int>(std::lround(q)));
        if (std::find(plan.scales.begin(), plan.scales.end(), scale) == plan.scales.end()) {
            plan.scales.push_back(scale);
        }
    }
    for (const double q : {stats.aspect.q25, stats.aspect.q50, stats.aspect.q75}) {
        const double ratio = round2(q);
        if (std::find(plan.ratios.begin(), plan.ratios.end(), ratio) == plan.ratios.end()) {
            plan.ratios.push_back(ratio);
        }
    }
    return plan;
}

int plan_rois(double mean_windows_per_image) {
    if (mean_windows_per_image < 0.0) throw Error("plan_rois: negative mean");
    const double raw = std::ceil(3.0 * mean_windows_per_image);
    return std::clamp(static_cast<int>(raw), 8, 200);
}

double combine_losses(const LossWeights& weights, const std::array<double, 5>& losses) {
    const auto k = weights.as_array();
    double total = 0.0;
    for (int i = 0; i < 5; ++i) {
        if (!std::isfinite(k[i]) || !std::isfinite(losses[i]) || k[i] < 0.0 || losses[i] < 0.0) {
            throw Error("combine_losses: inputs must be finite and non-negative");
        }
        total += k[i] * losses[i];
    }
    return total;
}

LossWeights normalize_weights(const LossWeights& weights) {
    const auto k = weights.as_array();
    double sum = 0.0;
    for (const double v : k) {
        if (!std::isfinite(v) || v < 0.0) {
            throw Error("normalize_weights: components must be finite and non-negative");
        }
        sum += v;
    }
    if (sum == 0.0) throw Error("normalize_weights: all-zero weight vector");
    return LossWeights{k[0] / sum, k[1] / sum, k[2] / sum, k[3] / sum, k[4] / sum};
}

NetworkConfig build_config(const DatasetStats& stats) {
    stats.validate();
    const double width = stats.window_width.q50 > 0.0
                             ? stats.window_width.q50
                             : estimate_object_width(stats.image_side,
                                                     stats.object_fraction > 0.0
                                                         ? stats.object_fraction
                                                         : 0.1);
    NetworkConfig config;
    config.input_side = stats.image_side;
    config.k_layer = plan_depth(width);
    AnchorPlan anchors = plan_anchors(stats);
    config.anchor_scales = std::move(anchors.scales);
    config.anchor_ratios = std::move(anchors.ratios);
    config.rois_per_image = plan_rois(stats.mean_windows_per_image);
    config.loss_weights = normalize_weights(LossWeights{1.0, 1.0, 1.0, 1.0, 1.0});
    config.p_min = 0.7;
    config.validate();
    return config;
}

std::string config_to_json(const NetworkConfig& config) {
    const json doc{{"input_side", config.input_side},
                   {"k_layer", config.k_layer},
                   {"anchor_scales", config.anchor_scales},
                   {"anchor_ratios", config.anchor_ratios},
                   {"rois_per_image", config.rois_per_image},
                   {"loss_weights",
                    {{"alpha", config.loss_weights.alpha},
                     {"beta", config.loss_weights.beta},
                     {"gamma", config.loss_weights.gamma},
                     {"delta", config.loss_weights.delta},
                     {"epsilon", config.loss_weights.epsilon}}},
                   {"p_min", config.p_min}};
    return doc.dump(2) + "\n";
}

NetworkConfig config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
    NetworkConfig config;
    config.input_side = doc.at("input_side").get<int>();
    config.k_layer = doc.at("k_layer").get<int>();
    config.anchor_scales = doc.at("anchor_scales").get<std::vector<int>>();
    config.anchor_ratios = doc.at("anchor_ratios").get<std::vector<double>>();
    config.rois_per_image = doc.at("rois_per_image").get<int>();
    const json& w = doc.at("loss_weights");
    config.loss_weights = LossWeights{w.at("alpha").get<double>(), w.at("beta").get<double>(),
                                      w.at("gamma").get<double>(), w.at("delta").get<double>(),
                                      w.at("epsilon").get<double>()};
    config.p_min = doc.at("p_min").get<double>();
    config.validate();
    return config;
}

namespace {

double iou_real(double ax0, double ay0, double ax1, double ay1, double bx0, double by0,
                double bx1, double by1) {
    const double ix = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
    const double iy = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
    const double inter = ix * iy;
    const double uni = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace

double anchor_coverage(const NetworkConfig& config, const std::vector<WindowAnnotation>& gts,
                       double iou_threshold) {
    config.validate();
    if (gts.empty()) return 1.0;
    const double stride = static_cast<double>(1 << config.k_layer);
    std::size_t covered = 0;
    for (const auto& gt : gts) {
        const double img_w = gt.mask.width;
        const double img_h = gt.mask.height;
        const double gx0 = gt.bbox.x, gy0 = gt.bbox.y;
        const double gx1 = gx0 + gt.bbox.w, gy1 = gy0 + gt.bbox.h;
        bool hit = false;
        for (double cy = stride / 2.0; cy < img_h && !hit; cy += stride) {
            for (double cx = stride / 2.0; cx < img_w && !hit; cx += stride) {
                for (const int scale : config.anchor_scales) {
                    for (const double ratio : config.anchor_ratios) {
                        const double aw = scale / std::sqrt(ratio);
                        const double ah = scale * std::sqrt(ratio);
                        if (iou_real(cx - aw / 2.0, cy - ah / 2.0, cx + aw / 2.0, cy + ah / 2.0,
                                     gx0, gy0, gx1, gy1) >= iou_threshold) {
                            hit = true;
                            break;
                        }
                    }
                    if (hit) break;
                }
            }
        }
        if (hit) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(gts.size());
}

}  // namespace facadewin
