#pragma once

#include <optional>
#include <string>
#include <vector>

#include "facadewin/eval.hpp"

namespace facadewin {

enum class SweepObjective { ap50, recall, f1 };

std::string to_string(SweepObjective objective);
SweepObjective sweep_objective_from_string(const std::string& name);

struct SweepPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double ap50 = 0.0;
};

struct SweepResult {
    double best_threshold = 0.0;
    std::vector<SweepPoint> curve;
};

/// Evaluates every threshold of the ascending grid and returns the argmax
/// of the objective (lowest threshold on ties) plus the whole curve.
/// Throws on an empty or non-ascending grid.
SweepResult sweep_threshold(const std::vector<Detection>& dets,
                            const std::vector<WindowAnnotation>& gts,
                            const std::vector<double>& grid,
                            SweepObjective objective = SweepObjective::ap50,
                            EvalMode mode = EvalMode::box);

/// The default sweep grid: 0.05 steps over [0.05, 0.95].
std::vector<double> default_sweep_grid();

std::string curve_to_csv(const std::vector<SweepPoint>& curve);

/// Greedy non-maximum suppression on box IoU, per image, by descending
/// score. Kept detections preserve their input order.
std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold = 0.5);

/// A ground-truth window claimed by two or more detections.
struct DoubleDetection {
    std::string image_id;
    int gt_index = 0;
    int count = 0;
    std::vector<int> det_indices;
};

/// GTs overlapped (box IoU >= threshold) by at least two detections,
/// sorted by claim count descending.
std::vector<DoubleDetection> find_double_detections(const std::vector<Detection>& dets,
                                                    const std::vector<WindowAnnotation>& gts,
                                                    double iou_threshold = 0.5);

struct MissedEntry {
    std::string image_id;
    int gt_index = 0;
    double center_distance = 0.0;  // normalized by image_side * sqrt(2) / 2
};

struct CenterBias {
    std::vector<MissedEntry> missed;
    std::optional<double> missed_mean;
    std::optional<double> detected_mean;
};

/// Distances of missed vs detected ground-truth centers from the image
/// center, normalized by the half-diagonal so both datasets compare.
CenterBias missed_center_bias(const std::vector<Detection>& dets,
                              const std::vector<WindowAnnotation>& gts, int image_side,
                              double iou_threshold = 0.5, EvalMode mode = EvalMode::box);

std::string diagnostics_to_json(const std::vector<DoubleDetection>& doubles,
                                const CenterBias& bias);

}  // namespace facadewin
