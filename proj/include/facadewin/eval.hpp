#pragma once

#include <string>
#include <vector>

#include "facadewin/annotations.hpp"

namespace facadewin {

enum class EvalMode { box, mask };

std::string to_string(EvalMode mode);
EvalMode eval_mode_from_string(const std::string& name);

enum class ApVariant { envelope, coco101 };

/// Outcome of greedy score-ordered matching. Flags are indexed like the
/// input detections; matched_gt holds the claimed ground-truth index or -1.
struct MatchResult {
    std::vector<bool> is_tp;
    std::vector<int> matched_gt;
    std::vector<int> unmatched_gts;

    std::size_t tp_count() const;
};

/// Greedy one-to-one matching at an IoU threshold: detections claim ground
/// truth in descending score order (ties by input index); each claims the
/// highest-IoU free GT on its image, IoU ties resolved toward the lower GT
/// index. Mask mode requires masks on both sides.
MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<WindowAnnotation>& gts,
                             double iou_threshold = 0.5, EvalMode mode = EvalMode::box);

/// Average precision at the matching threshold over the full ranking.
/// The default variant integrates the exact precision envelope over
/// recall; coco101 samples 101 evenly spaced recall points instead.
/// No ground truth: 1.0 without detections, otherwise 0.0.
double ap50(const std::vector<Detection>& dets, const std::vector<WindowAnnotation>& gts,
            EvalMode mode = EvalMode::box, ApVariant variant = ApVariant::envelope,
            double iou_threshold = 0.5);

struct EvalReport {
    double recall = 0.0;
    double precision = 0.0;
    double ap50 = 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    int n_images = 0;
    EvalMode mode = EvalMode::box;
};

/// Thresholds detections at p_min (score >= p_min survives), matches, and
/// fills the report. Precision and recall are 1.0 when their denominators
/// are empty; AP50 always uses the unthresholded ranking.
EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<WindowAnnotation>& gts,
                    double p_min, EvalMode mode = EvalMode::box,
                    ApVariant variant = ApVariant::envelope, double iou_threshold = 0.5);

struct RunDeltas {
    double recall = 0.0;
    double precision = 0.0;
    double ap50 = 0.0;
};

/// Componentwise optimised minus standard, rounded to 2 decimals.
/// Throws when the reports disagree on mode.
RunDeltas compare_runs(const EvalReport& standard, const EvalReport& optimised);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// One-line CSV record (with header constant) for table building.
std::string report_csv_header();
std::string report_csv_row(const EvalReport& report, double p_min);

}  // namespace facadewin
