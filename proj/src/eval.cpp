#include "facadewin/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <json.hpp>
#include <numeric>
#include <set>
#include <sstream>

#include "facadewin/errors.hpp"

namespace facadewin {

using nlohmann::json;

std::string to_string(EvalMode mode) { return mode == EvalMode::box ? "box" : "mask"; }

EvalMode eval_mode_from_string(const std::string& name) {
    if (name == "box") return EvalMode::box;
    if (name == "mask") return EvalMode::mask;
    throw Error("unknown eval mode: " + name);
}

std::size_t MatchResult::tp_count() const {
    return static_cast<std::size_t>(std::count(is_tp.begin(), is_tp.end(), true));
}

namespace {

double pair_iou(const Detection& det, const WindowAnnotation& gt, EvalMode mode) {
    if (mode == EvalMode::box) return iou_box(det.bbox, gt.bbox);
    if (!det.mask) throw Error("mask-mode evaluation requires detection masks");
    return iou_mask(*det.mask, gt.mask);
}

/// Detection indices in matching order: descending score, ties by input
/// index.
std::vector<std::size_t> score_order(const std::vector<Detection>& dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });
    return order;
}

}  // namespace

MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<WindowAnnotation>& gts, double iou_threshold,
                             EvalMode mode) {
    MatchResult result;
    result.is_tp.assign(dets.size(), false);
    result.matched_gt.assign(dets.size(), -1);
    std::vector<bool> gt_claimed(gts.size(), false);

    // Group ground truth by image once; matching is per image.
    std::map<std::string, std::vector<std::size_t>> gts_by_image;
    for (std::size_t g = 0; g < gts.size(); ++g) {
        gts_by_image[gts[g].image_id].push_back(g);
    }

    for (const std::size_t d : score_order(dets)) {
        const auto it = gts_by_image.find(dets[d].image_id);
        if (it == gts_by_image.end()) continue;
        double best_iou = 0.0;
        int best_gt = -1;
        for (const std::size_t g : it->second) {
            if (gt_claimed[g]) continue;
            const double iou = pair_iou(dets[d], gts[g], mode);
            if (iou >= iou_threshold && iou > best_iou) {
                best_iou = iou;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0) {
            gt_claimed[best_gt] = true;
            result.is_tp[d] = true;
            result.matched_gt[d] = best_gt;
        }
    }
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (!gt_claimed[g]) result.unmatched_gts.push_back(static_cast<int>(g));
    }
    return result;
}

double ap50(const std::vector<Detection>& dets, const std::vector<WindowAnnotation>& gts,
            EvalMode mode, ApVariant variant, double iou_threshold) {
    const std::size_t n_gt = gts.size();
    if (n_gt == 0) return dets.empty() ? 1.0 : 0.0;
    if (dets.empty()) return 0.0;

    const MatchResult match = match_detections(dets, gts, iou_threshold, mode);
    const auto order = score_order(dets);

    std::vector<double> precision, recall;
    precision.reserve(dets.size());
    recall.reserve(dets.size());
    std::size_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (match.is_tp[order[rank]]) ++tp;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    }
    // Precision envelope: monotone non-increasing from the right.
    for (std::size_t i = precision.size() - 1; i-- > 0;) {
        precision[i] = std::max(precision[i], precision[i + 1]);
    }

    if (variant == ApVariant::coco101) {
        double sum = 0.0;
        for (int s = 0; s <= 100; ++s) {
            const double r = static_cast<double>(s) / 100.0;
            // First ranking position reaching recall r.
            double p_at = 0.0;
            for (std::size_t i = 0; i < recall.size(); ++i) {
                if (recall[i] >= r - 1e-12) {
                    p_at = precision[i];
                    break;
                }
            }
            sum += p_at;
        }
        return sum / 101.0;
    }

    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < recall.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<WindowAnnotation>& gts,
                    double p_min, EvalMode mode, ApVariant variant, double iou_threshold) {
    std::vector<Detection> kept;
    kept.reserve(dets.size());
    for (const auto& det : dets) {
        if (det.score >= p_min) kept.push_back(det);
    }
    const MatchResult match = match_detections(kept, gts, iou_threshold, mode);

    EvalReport report;
    report.mode = mode;
    report.tp = static_cast<std::int64_t>(match.tp_count());
    report.fp = static_cast<std::int64_t>(kept.size()) - report.tp;
    report.fn = static_cast<std::int64_t>(match.unmatched_gts.size());
    report.precision = (report.tp + report.fp) == 0
                           ? 1.0
                           : static_cast<double>(report.tp) /
                                 static_cast<double>(report.tp + report.fp);
    report.recall = (report.tp + report.fn) == 0
                        ? 1.0
                        : static_cast<double>(report.tp) /
                              static_cast<double>(report.tp + report.fn);
    report.ap50 = ap50(dets, gts, mode, variant, iou_threshold);

    std::set<std::string> image_ids;
    for (const auto& gt : gts) image_ids.insert(gt.image_id);
    for (const auto& det : dets) image_ids.insert(det.image_id);
    report.n_images = static_cast<int>(image_ids.size());
    return report;
}

namespace {

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

RunDeltas compare_runs(const EvalReport& standard, const EvalReport& optimised) {
    if (standard.mode != optimised.mode) {
        throw Error("compare_runs: reports have different modes");
    }
    return RunDeltas{round2(optimised.recall - standard.recall),
                     round2(optimised.precision - standard.precision),
                     round2(optimised.ap50 - standard.ap50)};
}

std::string report_to_json(const EvalReport& report) {
    const json doc{{"recall", report.recall},   {"precision", report.precision},
                   {"ap50", report.ap50},       {"tp", report.tp},
                   {"fp", report.fp},           {"fn", report.fn},
                   {"n_images", report.n_images}, {"mode", to_string(report.mode)}};
    return doc.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
    EvalReport report;
    report.recall = doc.at("recall").get<double>();
    report.precision = doc.at("precision").get<double>();
    report.ap50 = doc.at("ap50").get<double>();
    report.tp = doc.value("tp", std::int64_t{0});
    report.fp = doc.value("fp", std::int64_t{0});
    report.fn = doc.value("fn", std::int64_t{0});
    report.n_images = doc.value("n_images", 0);
    report.mode = eval_mode_from_string(doc.value("mode", "box"));
    return report;
}

std::string report_csv_header() {
    return "mode,p_min,recall,precision,ap50,tp,fp,fn,n_images\n";
}

std::string report_csv_row(const EvalReport& report, double p_min) {
    std::ostringstream row;
    row << to_string(report.mode) << ',' << p_min << ',' << report.recall << ','
        << report.precision << ',' << report.ap50 << ',' << report.tp << ',' << report.fp << ','
        << report.fn << ',' << report.n_images << '\n';
    return row.str();
}

}  // namespace facadewin
