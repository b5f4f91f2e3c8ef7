#pragma once

#include <array>
#include <string>
#include <vector>

#include "facadewin/annotations.hpp"

namespace facadewin {

struct Quantiles {
    double q25 = 0.0;
    double q50 = 0.0;
    double q75 = 0.0;

    bool ordered() const { return q25 <= q50 && q50 <= q75; }
};

/// Summary of a crop dataset that the planner consumes. image_side must be
/// one of {32, 64, 128, 256}, i.e. 1024 / 2^m with m in {2..5}.
struct DatasetStats {
    int image_side = 0;
    int m = 0;
    Quantiles window_width;  // quantiles of sqrt(bbox area), px
    Quantiles aspect;        // quantiles of h / w
    double mean_windows_per_image = 0.0;
    double object_fraction = 0.0;  // mean window width / image side

    void validate() const;
};

/// Computes stats over a whole annotation set. All images must share one
/// side length; at least one annotation is required for the quantiles.
DatasetStats stats_from_annotations(const AnnotationSet& set);

/// Weights of the five training loss terms: RPN class, RPN bbox, head
/// class, head bbox, head mask.
struct LossWeights {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    double delta = 1.0;
    double epsilon = 1.0;

    std::array<double, 5> as_array() const { return {alpha, beta, gamma, delta, epsilon}; }
    bool operator==(const LossWeights&) const = default;
};

/// Planned detector configuration.
struct NetworkConfig {
    int input_side = 0;
    int k_layer = 0;  // number of stride-2 downsampling stages
    std::vector<int> anchor_scales;
    std::vector<double> anchor_ratios;
    int rois_per_image = 0;
    LossWeights loss_weights;
    double p_min = 0.7;

    void validate() const;
};

/// A-priori object width estimate: fraction of the image side.
double estimate_object_width(double image_side, double fraction = 0.1);

/// Largest k in [1, 5] leaving the object wider than 3 px after k halvings.
/// Throws Error("objects too small for any downsampling") when even k = 1
/// fails.
int plan_depth(double object_width);

struct AnchorPlan {
    std::vector<int> scales;
    std::vector<double> ratios;
};

/// Anchor scales from the window-width quantiles (rounded, deduplicated,
/// floored at 4 px) and ratios from the aspect quantiles (2 decimals,
/// deduplicated).
AnchorPlan plan_anchors(const DatasetStats& stats);

/// ceil(3 * mean windows per image), clamped to [8, 200].
int plan_rois(double mean_windows_per_image);

/// Weighted sum of the five loss terms; linear in both arguments.
double combine_losses(const LossWeights& weights, const std::array<double, 5>& losses);

/// Canonical representative of the weight equivalence class: components
/// scaled to sum to 1. Idempotent. Throws on an all-zero vector.
LossWeights normalize_weights(const LossWeights& weights);

/// Full plan: depth from the median window width, anchors and ROIs from
/// the stats, uniform normalized weights, p_min 0.7.
NetworkConfig build_config(const DatasetStats& stats);

std::string config_to_json(const NetworkConfig& config);
NetworkConfig config_from_json(const std::string& text);

/// Fraction of ground-truth boxes that some anchor (grid stride
/// 2^k_layer, planned scales x ratios) overlaps with IoU >= iou_threshold.
double anchor_coverage(const NetworkConfig& config,
                       const std::vector<WindowAnnotation>& gts,
                       double iou_threshold = 0.5);

}  // namespace facadewin
