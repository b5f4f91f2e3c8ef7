#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "facadewin/citygml.hpp"
#include "facadewin/errors.hpp"
#include "facadewin/eval.hpp"
#include "facadewin/pipeline.hpp"
#include "facadewin/planner.hpp"
#include "facadewin/synthetic.hpp"
#include "facadewin/tuner.hpp"

namespace fs = std::filesystem;
using namespace facadewin;

namespace {

std::vector<TextureImage> load_texture_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("image directory does not exist: " + dir.string());
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw IoError("no .png/.jpg images under " + dir.string());
    std::vector<TextureImage> images;
    images.reserve(paths.size());
    for (const auto& path : paths) images.push_back(read_image(path));
    return images;
}

int dataset_image_side(const AnnotationSet& set) {
    if (set.images.empty()) throw Error("dataset has no images");
    const int side = set.images.front().width;
    for (const auto& img : set.images) {
        if (img.width != side || img.height != side) {
            throw Error("dataset images do not share one square side");
        }
    }
    return side;
}

void draw_box_outline(TextureImage& image, const BBox& box, std::uint8_t r, std::uint8_t g,
                      std::uint8_t b) {
    const int x0 = std::clamp(box.x, 0, image.width - 1);
    const int x1 = std::clamp(box.x + box.w - 1, 0, image.width - 1);
    const int y0 = std::clamp(box.y, 0, image.height - 1);
    const int y1 = std::clamp(box.y + box.h - 1, 0, image.height - 1);
    auto paint = [&](int x, int y) {
        std::uint8_t* px = image.at(x, y);
        px[0] = r;
        px[1] = g;
        px[2] = b;
    };
    for (int x = x0; x <= x1; ++x) {
        paint(x, y0);
        paint(x, y1);
    }
    for (int y = y0; y <= y1; ++y) {
        paint(x0, y);
        paint(x1, y);
    }
}

struct CliPaths {
    std::string a, b, out, root, spec, noise, csv, overlay;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"facadewin - facade window detection dataset, planning and evaluation toolkit"};
    app.require_subcommand(1);

    CliPaths paths;
    int side = 128;
    std::uint64_t seed = 0;
    double min_visible = 0.5;
    bool paper_faithful = false;
    bool no_equalize = false;
    std::string mode = "box";
    double p_min = 0.5;
    bool coco101 = false;
    double iou = 0.5;
    std::string objective = "ap50";
    double grid_min = 0.05, grid_max = 0.95, grid_step = 0.05;

    auto* ingest = app.add_subcommand(
        "ingest", "Parse a CityGML file into a texture manifest JSON");
    ingest->add_option("gml", paths.a, "CityGML 2.0 document")->required();
    ingest->add_option("-o,--out", paths.out, "Manifest JSON path")->required();
    ingest->add_option("--root", paths.root,
                       "Texture root directory; when given, image sizes are filled in");

    auto* prep = app.add_subcommand(
        "prep", "Crop, equalize, rotate and split labeled textures into a dataset");
    prep->add_option("images", paths.a, "Directory of texture images (.png/.jpg)")->required();
    prep->add_option("labels", paths.b, "COCO-style annotation JSON for those textures")
        ->required();
    prep->add_option("--side", side, "Crop side in pixels (128 or 256 in standard runs)")
        ->default_val(128);
    prep->add_option("--seed", seed, "Split shuffle seed")->default_val(0);
    prep->add_option("--min-visible", min_visible,
                     "Minimum visible area fraction for boundary windows")
        ->default_val(0.5);
    prep->add_flag("--paper-faithful", paper_faithful,
                   "Shuffle crops directly instead of grouping by parent texture");
    prep->add_flag("--no-equalize", no_equalize, "Skip histogram equalization");
    prep->add_option("-o,--out", paths.out, "Output dataset directory")->required();

    auto* plan = app.add_subcommand("plan", "Plan a network configuration from dataset stats");
    plan->add_option("dataset", paths.a, "Dataset directory")->required();
    plan->add_option("-o,--out", paths.out, "Config JSON path")->required();

    auto* synth = app.add_subcommand("synth", "Generate synthetic facade scenes");
    synth->add_option("--spec", paths.spec, "Scene spec JSON (one object or an array)")
        ->required();
    synth->add_option("-o,--out", paths.out, "Output dataset directory")->required();

    auto* simulate = app.add_subcommand(
        "simulate", "Run the noisy synthetic detector over dataset ground truth");
    simulate->add_option("dataset", paths.a, "Dataset directory")->required();
    simulate->add_option("--noise", paths.noise, "Detector noise spec JSON")->required();
    simulate->add_option("-o,--out", paths.out, "Detections JSON path")->required();

    auto* eval_cmd = app.add_subcommand("eval", "Score detections against dataset ground truth");
    eval_cmd->add_option("dets", paths.a, "Detections JSON")->required();
    eval_cmd->add_option("dataset", paths.b, "Dataset directory")->required();
    eval_cmd->add_option("--mode", mode, "box or mask")->default_val("box");
    eval_cmd->add_option("--pmin", p_min, "Score threshold")->default_val(0.5);
    eval_cmd->add_option("--iou", iou, "Matching IoU threshold")->default_val(0.5);
    eval_cmd->add_flag("--coco101", coco101, "101-point sampled AP instead of the exact envelope");
    eval_cmd->add_option("-o,--out", paths.out, "Report JSON path")->required();
    eval_cmd->add_option("--csv", paths.csv, "Also write a one-row CSV for table building");

    auto* sweep = app.add_subcommand("sweep", "Sweep the detection threshold p_min");
    sweep->add_option("dets", paths.a, "Detections JSON")->required();
    sweep->add_option("dataset", paths.b, "Dataset directory")->required();
    sweep->add_option("--objective", objective, "ap50, recall or f1")->default_val("ap50");
    sweep->add_option("--mode", mode, "box or mask")->default_val("box");
    sweep->add_option("--grid-min", grid_min, "Lowest threshold")->default_val(0.05);
    sweep->add_option("--grid-max", grid_max, "Highest threshold")->default_val(0.95);
    sweep->add_option("--grid-step", grid_step, "Threshold step")->default_val(0.05);
    sweep->add_option("-o,--out", paths.out, "Curve CSV path")->required();

    auto* compare = app.add_subcommand("compare", "Print optimised-minus-standard report deltas");
    compare->add_option("standard", paths.a, "Standard run report JSON")->required();
    compare->add_option("optimised", paths.b, "Optimised run report JSON")->required();
    compare->add_option("-o,--out", paths.out, "Optional deltas JSON path");

    auto* diagnose = app.add_subcommand(
        "diagnose", "Report double detections and the center bias of missed windows");
    diagnose->add_option("dets", paths.a, "Detections JSON")->required();
    diagnose->add_option("dataset", paths.b, "Dataset directory")->required();
    diagnose->add_option("--iou", iou, "Claim IoU threshold")->default_val(0.5);
    diagnose->add_option("-o,--out", paths.out, "Diagnostics JSON path");
    diagnose->add_option("--overlay-dir", paths.overlay,
                         "Write detection overlay PNGs into this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (ingest->parsed()) {
            TextureManifest manifest = parse_citygml(load_text(paths.a));
            if (!paths.root.empty()) {
                const auto loaded = load_textures(manifest, paths.root);
                for (const auto& missing : loaded.missing) {
                    std::cerr << "missing texture: " << missing << "\n";
                }
            }
            save_text(manifest_to_json(manifest), paths.out);
            std::cout << manifest.entries.size() << " entries (" << manifest.skipped_refs
                      << " skipped)\n";
        } else if (prep->parsed()) {
            PrepOptions options;
            options.side = side;
            options.seed = seed;
            options.min_visible = min_visible;
            options.paper_faithful = paper_faithful;
            options.equalize = !no_equalize;
            const auto textures = load_texture_dir(paths.a);
            const auto labels = annotation_set_from_json(load_text(paths.b));
            const PrepResult result = prep_dataset(textures, labels, options);
            write_dataset(paths.out, result.images, result.annotations);
            save_text(crops_to_json(result.crops), fs::path(paths.out) / "crops.json");
            save_text(split_to_json(result.split), fs::path(paths.out) / "split.json");
            std::cout << result.images.size() << " images, "
                      << result.annotations.annotations.size() << " windows, split "
                      << result.split.train.size() << "/" << result.split.val.size() << "/"
                      << result.split.test.size() << "\n";
        } else if (plan->parsed()) {
            const auto set = read_dataset_annotations(paths.a);
            const DatasetStats stats = stats_from_annotations(set);
            const NetworkConfig config = build_config(stats);
            save_text(config_to_json(config), paths.out);
            std::cout << "k_layer=" << config.k_layer << " anchors=" << config.anchor_scales.size()
                      << "x" << config.anchor_ratios.size() << " rois=" << config.rois_per_image
                      << "\n";
        } else if (synth->parsed()) {
            const auto specs = scene_specs_from_json(load_text(paths.spec));
            std::vector<TextureImage> images;
            AnnotationSet set;
            for (const auto& spec : specs) {
                FacadeScene scene = generate_facade(spec);
                ImageRecord record{scene.image.id, scene.image.width, scene.image.height,
                                   scene.image.id + ".png", ""};
                set.images.push_back(record);
                for (auto& ann : scene.annotations) set.annotations.push_back(std::move(ann));
                images.push_back(std::move(scene.image));
            }
            write_dataset(paths.out, images, set);
            std::cout << images.size() << " scenes, " << set.annotations.size() << " windows\n";
        } else if (simulate->parsed()) {
            const auto set = read_dataset_annotations(paths.a);
            const auto noise = noise_spec_from_json(load_text(paths.noise));
            const auto dets = simulate_detector(set.annotations, noise);
            save_text(detections_to_json(dets), paths.out);
            std::cout << dets.size() << " detections\n";
        } else if (eval_cmd->parsed()) {
            const auto dets = detections_from_json(load_text(paths.a));
            const auto set = read_dataset_annotations(paths.b);
            const EvalReport report =
                evaluate(dets, set.annotations, p_min, eval_mode_from_string(mode),
                         coco101 ? ApVariant::coco101 : ApVariant::envelope, iou);
            save_text(report_to_json(report), paths.out);
            if (!paths.csv.empty()) {
                save_text(report_csv_header() + report_csv_row(report, p_min), paths.csv);
            }
            std::printf("recall=%.4f precision=%.4f ap50=%.4f\n", report.recall, report.precision,
                        report.ap50);
        } else if (sweep->parsed()) {
            const auto dets = detections_from_json(load_text(paths.a));
            const auto set = read_dataset_annotations(paths.b);
            std::vector<double> grid;
            for (double t = grid_min; t <= grid_max + 1e-9; t += grid_step) grid.push_back(t);
            const SweepResult result =
                sweep_threshold(dets, set.annotations, grid,
                                sweep_objective_from_string(objective),
                                eval_mode_from_string(mode));
            save_text(curve_to_csv(result.curve), paths.out);
            std::printf("best p_min=%.2f\n", result.best_threshold);
        } else if (compare->parsed()) {
            const EvalReport standard = report_from_json(load_text(paths.a));
            const EvalReport optimised = report_from_json(load_text(paths.b));
            const RunDeltas deltas = compare_runs(standard, optimised);
            std::printf("%.2f %.2f %.2f\n", deltas.recall, deltas.precision, deltas.ap50);
            if (!paths.out.empty()) {
                char buffer[128];
                std::snprintf(buffer, sizeof(buffer),
                              "{\n  \"delta_recall\": %.2f,\n  \"delta_precision\": %.2f,\n"
                              "  \"delta_ap50\": %.2f\n}\n",
                              deltas.recall, deltas.precision, deltas.ap50);
                save_text(buffer, paths.out);
            }
        } else if (diagnose->parsed()) {
            const auto dets = detections_from_json(load_text(paths.a));
            const auto set = read_dataset_annotations(paths.b);
            const int image_side = dataset_image_side(set);
            const auto doubles = find_double_detections(dets, set.annotations, iou);
            const CenterBias bias = missed_center_bias(dets, set.annotations, image_side, iou);
            const std::string text = diagnostics_to_json(doubles, bias);
            if (!paths.out.empty()) save_text(text, paths.out);
            std::cout << text;
            if (!paths.overlay.empty()) {
                fs::create_directories(paths.overlay);
                for (const auto& record : set.images) {
                    const fs::path src = fs::path(paths.b) / "images" / record.file_name;
                    if (!fs::is_regular_file(src)) continue;
                    TextureImage image = read_image(src, record.id);
                    for (const auto& gt : set.annotations) {
                        if (gt.image_id == record.id) draw_box_outline(image, gt.bbox, 0, 200, 0);
                    }
                    for (const auto& det : dets) {
                        if (det.image_id == record.id) {
                            draw_box_outline(image, det.bbox, 220, 30, 30);
                        }
                    }
                    write_png(image, fs::path(paths.overlay) / (record.id + "_overlay.png"));
                }
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
