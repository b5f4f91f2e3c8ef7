#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "facadewin/citygml.hpp"
#include "facadewin/dataset.hpp"
#include "facadewin/errors.hpp"
#include "facadewin/eval.hpp"
#include "facadewin/planner.hpp"
#include "facadewin/synthetic.hpp"
#include "facadewin/tuner.hpp"

namespace py = pybind11;
using namespace facadewin;

namespace {

using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

TextureImage image_from_array(const ByteArray& array, const std::string& id) {
    if (array.ndim() != 3 || array.shape(2) != 3) {
        throw Error("image array must have shape (height, width, 3)");
    }
    TextureImage image;
    image.id = id;
    image.height = static_cast<int>(array.shape(0));
    image.width = static_cast<int>(array.shape(1));
    image.pixels.assign(array.data(), array.data() + array.size());
    image.validate();
    return image;
}

py::array_t<std::uint8_t> image_to_array(const TextureImage& image) {
    image.validate();
    py::array_t<std::uint8_t> array({image.height, image.width, 3});
    std::copy(image.pixels.begin(), image.pixels.end(), array.mutable_data());
    return array;
}

BinaryMask mask_from_array(const ByteArray& array) {
    if (array.ndim() != 2) throw Error("mask array must have shape (height, width)");
    const int height = static_cast<int>(array.shape(0));
    const int width = static_cast<int>(array.shape(1));
    std::vector<std::uint8_t> dense(static_cast<std::size_t>(width) * height, 0);
    auto view = array.unchecked<2>();
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            dense[static_cast<std::size_t>(x) * height + y] = view(y, x) ? 1 : 0;
        }
    }
    return BinaryMask::encode(width, height, dense);
}

py::array_t<std::uint8_t> mask_to_array(const BinaryMask& mask) {
    const auto dense = mask.decode();
    py::array_t<std::uint8_t> array({mask.height, mask.width});
    auto view = array.mutable_unchecked<2>();
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            view(y, x) = dense[static_cast<std::size_t>(x) * mask.height + y];
        }
    }
    return array;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Facade window detection toolkit: geometry, dataset prep, "
              "configuration planning, evaluation and inference tuning.";

    py::register_exception<Error>(m, "FacadewinError");

    py::class_<BBox>(m, "BBox")
        .def(py::init<int, int, int, int>(), py::arg("x"), py::arg("y"), py::arg("w"),
             py::arg("h"))
        .def_readwrite("x", &BBox::x)
        .def_readwrite("y", &BBox::y)
        .def_readwrite("w", &BBox::w)
        .def_readwrite("h", &BBox::h)
        .def("area", &BBox::area)
        .def("__eq__", [](const BBox& a, const BBox& b) { return a == b; })
        .def("__repr__", [](const BBox& b) {
            return "BBox(x=" + std::to_string(b.x) + ", y=" + std::to_string(b.y) +
                   ", w=" + std::to_string(b.w) + ", h=" + std::to_string(b.h) + ")";
        });

    py::class_<BinaryMask>(m, "BinaryMask")
        .def_static("from_array", &mask_from_array, py::arg("array"),
                    "Encode a (height, width) uint8 array into column-major runs")
        .def("to_array", &mask_to_array)
        .def_readonly("width", &BinaryMask::width)
        .def_readonly("height", &BinaryMask::height)
        .def_readonly("runs", &BinaryMask::runs)
        .def("popcount", &BinaryMask::popcount)
        .def("tight_bbox", &BinaryMask::tight_bbox)
        .def("__eq__", [](const BinaryMask& a, const BinaryMask& b) { return a == b; });

    m.def("iou_box", &iou_box, py::arg("a"), py::arg("b"));
    m.def("iou_mask", &iou_mask, py::arg("a"), py::arg("b"));
    m.def("mask_from_box", &mask_from_box, py::arg("width"), py::arg("height"), py::arg("box"));

    py::class_<TextureImage>(m, "TextureImage")
        .def_static("from_array", &image_from_array, py::arg("array"), py::arg("id") = "image")
        .def("to_array", &image_to_array)
        .def_readwrite("id", &TextureImage::id)
        .def_readonly("width", &TextureImage::width)
        .def_readonly("height", &TextureImage::height)
        .def_readwrite("source", &TextureImage::source);

    py::class_<WindowAnnotation>(m, "WindowAnnotation")
        .def(py::init([](const std::string& image_id, const BBox& bbox, const BinaryMask& mask) {
                 WindowAnnotation ann;
                 ann.image_id = image_id;
                 ann.bbox = bbox;
                 ann.mask = mask;
                 return ann;
             }),
             py::arg("image_id"), py::arg("bbox"), py::arg("mask"))
        .def_readwrite("image_id", &WindowAnnotation::image_id)
        .def_readwrite("bbox", &WindowAnnotation::bbox)
        .def_readwrite("mask", &WindowAnnotation::mask)
        .def_readwrite("class_label", &WindowAnnotation::class_label);

    py::class_<Detection>(m, "Detection")
        .def(py::init([](const std::string& image_id, const BBox& bbox, double score,
                         std::optional<BinaryMask> mask) {
                 Detection det;
                 det.image_id = image_id;
                 det.bbox = bbox;
                 det.score = score;
                 det.mask = std::move(mask);
                 return det;
             }),
             py::arg("image_id"), py::arg("bbox"), py::arg("score"),
             py::arg("mask") = std::nullopt)
        .def_readwrite("image_id", &Detection::image_id)
        .def_readwrite("bbox", &Detection::bbox)
        .def_readwrite("score", &Detection::score)
        .def_readwrite("mask", &Detection::mask);

    // dataset pipeline -----------------------------------------------------
    py::class_<CropSpec>(m, "CropSpec")
        .def_readonly("parent_id", &CropSpec::parent_id)
        .def_readonly("origin_x", &CropSpec::origin_x)
        .def_readonly("origin_y", &CropSpec::origin_y)
        .def_readonly("side", &CropSpec::side)
        .def_readonly("index", &CropSpec::index)
        .def("image_id", &CropSpec::image_id);

    m.def("adaptive_crops", &adaptive_crops, py::arg("width"), py::arg("height"), py::arg("side"),
          py::arg("parent_id") = "");
    m.def("crop_annotations", &crop_annotations, py::arg("annotations"), py::arg("crop"),
          py::arg("min_visible") = 0.5, py::arg("crop_image_id") = "");
    m.def(
        "equalize_histogram",
        [](const ByteArray& array) {
            return image_to_array(equalize_histogram(image_from_array(array, "py")));
        },
        py::arg("image"), "Histogram-equalize an (h, w, 3) uint8 image");
    m.def(
        "rotate90",
        [](const ByteArray& array, int quarter_turns) {
            return image_to_array(rotate90_image(image_from_array(array, "py"), quarter_turns));
        },
        py::arg("image"), py::arg("quarter_turns") = 1);
    m.def("rotate90_annotation", &rotate90_annotation, py::arg("annotation"), py::arg("side"),
          py::arg("quarter_turns"), py::arg("new_image_id") = "");

    py::class_<DatasetSplit>(m, "DatasetSplit")
        .def_readonly("train", &DatasetSplit::train)
        .def_readonly("val", &DatasetSplit::val)
        .def_readonly("test", &DatasetSplit::test)
        .def_readonly("seed", &DatasetSplit::seed);
    m.def("split_dataset", &split_dataset, py::arg("ids"), py::arg("seed"));
    m.def("split_dataset_grouped", &split_dataset_grouped, py::arg("id_and_group"),
          py::arg("seed"));

    // configuration planner -------------------------------------------------
    py::class_<Quantiles>(m, "Quantiles")
        .def(py::init([](double q25, double q50, double q75) {
                 return Quantiles{q25, q50, q75};
             }),
             py::arg("q25"), py::arg("q50"), py::arg("q75"))
        .def_readwrite("q25", &Quantiles::q25)
        .def_readwrite("q50", &Quantiles::q50)
        .def_readwrite("q75", &Quantiles::q75);

    py::class_<DatasetStats>(m, "DatasetStats")
        .def(py::init([](int image_side, const Quantiles& window_width, const Quantiles& aspect,
                         double mean_windows_per_image, double object_fraction) {
                 DatasetStats stats;
                 stats.image_side = image_side;
                 for (int m_exp = 2; m_exp <= 5; ++m_exp) {
                     if ((1024 >> m_exp) == image_side) stats.m = m_exp;
                 }
                 stats.window_width = window_width;
                 stats.aspect = aspect;
                 stats.mean_windows_per_image = mean_windows_per_image;
                 stats.object_fraction = object_fraction;
                 stats.validate();
                 return stats;
             }),
             py::arg("image_side"), py::arg("window_width"), py::arg("aspect"),
             py::arg("mean_windows_per_image"), py::arg("object_fraction") = 0.1)
        .def_readonly("image_side", &DatasetStats::image_side)
        .def_readonly("m", &DatasetStats::m)
        .def_readonly("window_width", &DatasetStats::window_width)
        .def_readonly("aspect", &DatasetStats::aspect)
        .def_readonly("mean_windows_per_image", &DatasetStats::mean_windows_per_image)
        .def_readonly("object_fraction", &DatasetStats::object_fraction);

    py::class_<LossWeights>(m, "LossWeights")
        .def(py::init([](double alpha, double beta, double gamma, double delta, double epsilon) {
                 return LossWeights{alpha, beta, gamma, delta, epsilon};
             }),
             py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("gamma") = 1.0,
             py::arg("delta") = 1.0, py::arg("epsilon") = 1.0)
        .def_readwrite("alpha", &LossWeights::alpha)
        .def_readwrite("beta", &LossWeights::beta)
        .def_readwrite("gamma", &LossWeights::gamma)
        .def_readwrite("delta", &LossWeights::delta)
        .def_readwrite("epsilon", &LossWeights::epsilon)
        .def("as_tuple", [](const LossWeights& w) {
            return py::make_tuple(w.alpha, w.beta, w.gamma, w.delta, w.epsilon);
        });

    py::class_<AnchorPlan>(m, "AnchorPlan")
        .def_readonly("scales", &AnchorPlan::scales)
        .def_readonly("ratios", &AnchorPlan::ratios);

    py::class_<NetworkConfig>(m, "NetworkConfig")
        .def_readonly("input_side", &NetworkConfig::input_side)
        .def_readonly("k_layer", &NetworkConfig::k_layer)
        .def_readonly("anchor_scales", &NetworkConfig::anchor_scales)
        .def_readonly("anchor_ratios", &NetworkConfig::anchor_ratios)
        .def_readonly("rois_per_image", &NetworkConfig::rois_per_image)
        .def_readonly("loss_weights", &NetworkConfig::loss_weights)
        .def_readonly("p_min", &NetworkConfig::p_min)
        .def("to_json", &config_to_json);

    m.def("estimate_object_width", &estimate_object_width, py::arg("image_side"),
          py::arg("fraction") = 0.1);
    m.def("plan_depth", &plan_depth, py::arg("object_width"));
    m.def("plan_anchors", &plan_anchors, py::arg("stats"));
    m.def("plan_rois", &plan_rois, py::arg("mean_windows_per_image"));
    m.def("combine_losses", &combine_losses, py::arg("weights"), py::arg("losses"));
    m.def("normalize_weights", &normalize_weights, py::arg("weights"));
    m.def("build_config", &build_config, py::arg("stats"));
    m.def("anchor_coverage", &anchor_coverage, py::arg("config"), py::arg("gts"),
          py::arg("iou_threshold") = 0.5);

    // evaluation -------------------------------------------------------------
    py::class_<MatchResult>(m, "MatchResult")
        .def_readonly("is_tp", &MatchResult::is_tp)
        .def_readonly("matched_gt", &MatchResult::matched_gt)
        .def_readonly("unmatched_gts", &MatchResult::unmatched_gts)
        .def("tp_count", &MatchResult::tp_count);

    py::class_<EvalReport>(m, "EvalReport")
        .def(py::init([](double recall, double precision, double ap50) {
                 EvalReport report;
                 report.recall = recall;
                 report.precision = precision;
                 report.ap50 = ap50;
                 return report;
             }),
             py::arg("recall"), py::arg("precision"), py::arg("ap50"))
        .def_readonly("recall", &EvalReport::recall)
        .def_readonly("precision", &EvalReport::precision)
        .def_readonly("ap50", &EvalReport::ap50)
        .def_readonly("tp", &EvalReport::tp)
        .def_readonly("fp", &EvalReport::fp)
        .def_readonly("fn", &EvalReport::fn)
        .def_readonly("n_images", &EvalReport::n_images);

    py::class_<RunDeltas>(m, "RunDeltas")
        .def_readonly("recall", &RunDeltas::recall)
        .def_readonly("precision", &RunDeltas::precision)
        .def_readonly("ap50", &RunDeltas::ap50);

    m.def(
        "match_detections",
        [](const std::vector<Detection>& dets, const std::vector<WindowAnnotation>& gts,
           double iou_threshold, const std::string& mode) {
            return match_detections(dets, gts, iou_threshold, eval_mode_from_string(mode));
        },
        py::arg("dets"), py::arg("gts"), py::arg("iou_threshold") = 0.5, py::arg("mode") = "box");
    m.def(
        "ap50",
        [](const std::vector<Detection>& dets, const std::vector<WindowAnnotation>& gts,
           const std::string& mode, bool coco101) {
            return ap50(dets, gts, eval_mode_from_string(mode),
                        coco101 ? ApVariant::coco101 : ApVariant::envelope);
        },
        py::arg("dets"), py::arg("gts"), py::arg("mode") = "box", py::arg("coco101") = false);
    m.def(
        "evaluate",
        [](const std::vector<Detection>& dets, const std::vector<WindowAnnotation>& gts,
           double p_min, const std::string& mode, bool coco101) {
            return evaluate(dets, gts, p_min, eval_mode_from_string(mode),
                            coco101 ? ApVariant::coco101 : ApVariant::envelope);
        },
        py::arg("dets"), py::arg("gts"), py::arg("p_min") = 0.5, py::arg("mode") = "box",
        py::arg("coco101") = false);
    m.def("compare_runs", &compare_runs, py::arg("standard"), py::arg("optimised"));

    // inference tuning --------------------------------------------------------
    py::class_<SweepPoint>(m, "SweepPoint")
        .def_readonly("threshold", &SweepPoint::threshold)
        .def_readonly("precision", &SweepPoint::precision)
        .def_readonly("recall", &SweepPoint::recall)
        .def_readonly("ap50", &SweepPoint::ap50);
    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("best_threshold", &SweepResult::best_threshold)
        .def_readonly("curve", &SweepResult::curve);
    m.def(
        "sweep_threshold",
        [](const std::vector<Detection>& dets, const std::vector<WindowAnnotation>& gts,
           const std::vector<double>& grid, const std::string& objective,
           const std::string& mode) {
            return sweep_threshold(dets, gts, grid.empty() ? default_sweep_grid() : grid,
                                   sweep_objective_from_string(objective),
                                   eval_mode_from_string(mode));
        },
        py::arg("dets"), py::arg("gts"), py::arg("grid") = std::vector<double>{},
        py::arg("objective") = "ap50", py::arg("mode") = "box");
    m.def("default_sweep_grid", &default_sweep_grid);
    m.def("nms", &nms, py::arg("dets"), py::arg("iou_threshold") = 0.5);

    py::class_<DoubleDetection>(m, "DoubleDetection")
        .def_readonly("image_id", &DoubleDetection::image_id)
        .def_readonly("gt_index", &DoubleDetection::gt_index)
        .def_readonly("count", &DoubleDetection::count)
        .def_readonly("det_indices", &DoubleDetection::det_indices);
    m.def("find_double_detections", &find_double_detections, py::arg("dets"), py::arg("gts"),
          py::arg("iou_threshold") = 0.5);

    py::class_<MissedEntry>(m, "MissedEntry")
        .def_readonly("image_id", &MissedEntry::image_id)
        .def_readonly("gt_index", &MissedEntry::gt_index)
        .def_readonly("center_distance", &MissedEntry::center_distance);
    py::class_<CenterBias>(m, "CenterBias")
        .def_readonly("missed", &CenterBias::missed)
        .def_readonly("missed_mean", &CenterBias::missed_mean)
        .def_readonly("detected_mean", &CenterBias::detected_mean);
    m.def(
        "missed_center_bias",
        [](const std::vector<Detection>& dets, const std::vector<WindowAnnotation>& gts,
           int image_side, double iou_threshold, const std::string& mode) {
            return missed_center_bias(dets, gts, image_side, iou_threshold,
                                      eval_mode_from_string(mode));
        },
        py::arg("dets"), py::arg("gts"), py::arg("image_side"), py::arg("iou_threshold") = 0.5,
        py::arg("mode") = "box");

    // synthetic oracle ---------------------------------------------------------
    py::class_<FacadeSceneSpec>(m, "FacadeSceneSpec")
        .def(py::init<>())
        .def_readwrite("id", &FacadeSceneSpec::id)
        .def_readwrite("image_side", &FacadeSceneSpec::image_side)
        .def_readwrite("rows", &FacadeSceneSpec::rows)
        .def_readwrite("cols", &FacadeSceneSpec::cols)
        .def_readwrite("window_w", &FacadeSceneSpec::window_w)
        .def_readwrite("window_h", &FacadeSceneSpec::window_h)
        .def_readwrite("margin", &FacadeSceneSpec::margin)
        .def_readwrite("spacing", &FacadeSceneSpec::spacing)
        .def_readwrite("gamma", &FacadeSceneSpec::gamma)
        .def_readwrite("shadow_fraction", &FacadeSceneSpec::shadow_fraction)
        .def_readwrite("shear", &FacadeSceneSpec::shear)
        .def_readwrite("seed", &FacadeSceneSpec::seed);

    py::class_<FacadeScene>(m, "FacadeScene")
        .def_readonly("image", &FacadeScene::image)
        .def_readonly("annotations", &FacadeScene::annotations);
    m.def("generate_facade", &generate_facade, py::arg("spec"));

    py::class_<DetectorNoiseSpec>(m, "DetectorNoiseSpec")
        .def(py::init<>())
        .def_readwrite("drop_prob", &DetectorNoiseSpec::drop_prob)
        .def_readwrite("dup_prob", &DetectorNoiseSpec::dup_prob)
        .def_readwrite("jitter_px", &DetectorNoiseSpec::jitter_px)
        .def_readwrite("score_lo", &DetectorNoiseSpec::score_lo)
        .def_readwrite("score_hi", &DetectorNoiseSpec::score_hi)
        .def_readwrite("seed", &DetectorNoiseSpec::seed);
    m.def("simulate_detector", &simulate_detector, py::arg("gts"), py::arg("noise"));

    // CityGML ingest -------------------------------------------------------------
    py::class_<TextureManifestEntry>(m, "TextureManifestEntry")
        .def_readonly("texture_path", &TextureManifestEntry::texture_path)
        .def_readonly("surface_id", &TextureManifestEntry::surface_id)
        .def_readonly("tex_coords", &TextureManifestEntry::tex_coords)
        .def_readonly("image_width", &TextureManifestEntry::image_width)
        .def_readonly("image_height", &TextureManifestEntry::image_height);
    py::class_<TextureManifest>(m, "TextureManifest")
        .def_readonly("entries", &TextureManifest::entries)
        .def_readonly("skipped_refs", &TextureManifest::skipped_refs)
        .def("to_json", &manifest_to_json);
    m.def("parse_citygml", &parse_citygml, py::arg("xml_text"));
    m.def("manifest_from_json", &manifest_from_json, py::arg("text"));

    m.attr("__version__") = "0.1.0";
}
