#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "facadewin/geometry.hpp"

namespace facadewin {

/// Ground-truth window: bbox plus an exact binary mask with the extent of
/// its image. The mask support never leaves the bbox.
struct WindowAnnotation {
    std::string image_id;
    BBox bbox;
    BinaryMask mask;
    std::string class_label = "window";

    /// Checks bbox-inside-image, mask extent, nonzero popcount and
    /// support-inside-bbox. Throws Error on violation.
    void validate(int image_width, int image_height) const;
};

/// Scored predicted window. The mask is optional; mask-mode evaluation
/// rejects detections without one.
struct Detection {
    std::string image_id;
    BBox bbox;
    std::optional<BinaryMask> mask;
    double score = 0.0;
    std::string class_label = "window";
};

struct ImageRecord {
    std::string id;
    int width = 0;
    int height = 0;
    std::string file_name;
    std::string parent_id;  // grouping key for leakage-safe splits
};

/// Images plus their ground-truth annotations, the unit the COCO-style
/// JSON files carry.
struct AnnotationSet {
    std::vector<ImageRecord> images;
    std::vector<WindowAnnotation> annotations;

    const ImageRecord* find_image(const std::string& id) const;
    std::vector<WindowAnnotation> annotations_for(const std::string& image_id) const;
};

std::string annotation_set_to_json(const AnnotationSet& set);
AnnotationSet annotation_set_from_json(const std::string& text);

std::string detections_to_json(const std::vector<Detection>& dets);
std::vector<Detection> detections_from_json(const std::string& text);

void save_text(const std::string& text, const std::filesystem::path& path);
std::string load_text(const std::filesystem::path& path);

}  // namespace facadewin
