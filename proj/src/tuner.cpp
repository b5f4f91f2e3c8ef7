#include "facadewin/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "facadewin/errors.hpp"

namespace facadewin {

using nlohmann::json;

std::string to_string(SweepObjective objective) {
    switch (objective) {
        case SweepObjective::ap50: return "ap50";
        case SweepObjective::recall: return "recall";
        default: return "f1";
    }
}

SweepObjective sweep_objective_from_string(const std::string& name) {
    if (name == "ap50") return SweepObjective::ap50;
    if (name == "recall") return SweepObjective::recall;
    if (name == "f1") return SweepObjective::f1;
    throw Error("unknown sweep objective: " + name);
}

namespace {

double objective_value(const SweepPoint& point, SweepObjective objective) {
    switch (objective) {
        case SweepObjective::ap50: return point.ap50;
        case SweepObjective::recall: return point.recall;
        default: {
            const double denom = point.precision + point.recall;
            return denom > 0.0 ? 2.0 * point.precision * point.recall / denom : 0.0;
        }
    }
}

}  // namespace

SweepResult sweep_threshold(const std::vector<Detection>& dets,
                            const std::vector<WindowAnnotation>& gts,
                            const std::vector<double>& grid, SweepObjective objective,
                            EvalMode mode) {
    if (grid.empty()) throw Error("sweep: empty threshold grid");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] <= grid[i - 1]) throw Error("sweep: grid must be strictly ascending");
    }
    SweepResult result;
    result.curve.reserve(grid.size());
    double best_value = -1.0;
    for (const double threshold : grid) {
        const EvalReport report = evaluate(dets, gts, threshold, mode);
        SweepPoint point{threshold, report.precision, report.recall, report.ap50};
        const double value = objective_value(point, objective);
        if (value > best_value) {
            best_value = value;
            result.best_threshold = threshold;
        }
        result.curve.push_back(point);
    }
    return result;
}

std::vector<double> default_sweep_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(static_cast<double>(i) * 0.05);
    return grid;
}

std::string curve_to_csv(const std::vector<SweepPoint>& curve) {
    std::ostringstream out;
    out << "threshold,precision,recall,ap50\n";
    for (const auto& point : curve) {
        out << point.threshold << ',' << point.precision << ',' << point.recall << ','
            << point.ap50 << '\n';
    }
    return out.str();
}

std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });
    std::vector<bool> kept(dets.size(), false);
    std::map<std::string, std::vector<std::size_t>> kept_by_image;
    for (const std::size_t d : order) {
        bool suppressed = false;
        for (const std::size_t k : kept_by_image[dets[d].image_id]) {
            if (iou_box(dets[d].bbox, dets[k].bbox) >= iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) {
            kept[d] = true;
            kept_by_image[dets[d].image_id].push_back(d);
        }
    }
    std::vector<Detection> out;
    out.reserve(dets.size());
    for (std::size_t d = 0; d < dets.size(); ++d) {
        if (kept[d]) out.push_back(dets[d]);
    }
    return out;
}

std::vector<DoubleDetection> find_double_detections(const std::vector<Detection>& dets,
                                                    const std::vector<WindowAnnotation>& gts,
                                                    double iou_threshold) {
    std::vector<DoubleDetection> doubles;
    for (std::size_t g = 0; g < gts.size(); ++g) {
        DoubleDetection entry;
        entry.image_id = gts[g].image_id;
        entry.gt_index = static_cast<int>(g);
        for (std::size_t d = 0; d < dets.size(); ++d) {
            if (dets[d].image_id != gts[g].image_id) continue;
            if (iou_box(dets[d].bbox, gts[g].bbox) >= iou_threshold) {
                entry.det_indices.push_back(static_cast<int>(d));
            }
        }
        entry.count = static_cast<int>(entry.det_indices.size());
        if (entry.count >= 2) doubles.push_back(std::move(entry));
    }
    std::stable_sort(doubles.begin(), doubles.end(),
                     [](const DoubleDetection& a, const DoubleDetection& b) {
                         return a.count > b.count;
                     });
    return doubles;
}

CenterBias missed_center_bias(const std::vector<Detection>& dets,
                              const std::vector<WindowAnnotation>& gts, int image_side,
                              double iou_threshold, EvalMode mode) {
    if (image_side < 1) throw Error("center bias: image side must be positive");
    const MatchResult match = match_detections(dets, gts, iou_threshold, mode);
    std::vector<bool> missed_flag(gts.size(), false);
    for (const int g : match.unmatched_gts) missed_flag[static_cast<std::size_t>(g)] = true;

    const double half_diagonal = image_side * std::sqrt(2.0) / 2.0;
    const double center = static_cast<double>(image_side) / 2.0;
    auto distance_of = [&](const WindowAnnotation& gt) {
        const double cx = gt.bbox.x + gt.bbox.w / 2.0;
        const double cy = gt.bbox.y + gt.bbox.h / 2.0;
        return std::hypot(cx - center, cy - center) / half_diagonal;
    };

    CenterBias bias;
    double missed_sum = 0.0, detected_sum = 0.0;
    std::size_t detected_count = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const double distance = distance_of(gts[g]);
        if (missed_flag[g]) {
            bias.missed.push_back(
                MissedEntry{gts[g].image_id, static_cast<int>(g), distance});
            missed_sum += distance;
        } else {
            detected_sum += distance;
            ++detected_count;
        }
    }
    if (!bias.missed.empty()) {
        bias.missed_mean = missed_sum / static_cast<double>(bias.missed.size());
    }
    if (detected_count > 0) {
        bias.detected_mean = detected_sum / static_cast<double>(detected_count);
    }
    return bias;
}

std::string diagnostics_to_json(const std::vector<DoubleDetection>& doubles,
                                const CenterBias& bias) {
    json doubles_json = json::array();
    for (const auto& entry : doubles) {
        doubles_json.push_back(json{{"image_id", entry.image_id},
                                    {"gt_index", entry.gt_index},
                                    {"count", entry.count},
                                    {"det_indices", entry.det_indices}});
    }
    json missed_json = json::array();
    for (const auto& entry : bias.missed) {
        missed_json.push_back(json{{"image_id", entry.image_id},
                                   {"gt_index", entry.gt_index},
                                   {"center_distance", entry.center_distance}});
    }
    json doc{{"double_detections", doubles_json},
             {"missed", missed_json},
             {"missed_center_mean", bias.missed_mean ? json(*bias.missed_mean) : json(nullptr)},
             {"detected_center_mean",
              bias.detected_mean ? json(*bias.detected_mean) : json(nullptr)}};
    return doc.dump(2) + "\n";
}

}  // namespace facadewin
