#include "facadewin/annotations.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "facadewin/errors.hpp"

namespace facadewin {

using nlohmann::json;

void WindowAnnotation::validate(int image_width, int image_height) const {
    if (!bbox.valid()) {
        throw Error("annotation on '" + image_id + "': invalid bbox");
    }
    if (bbox.x + bbox.w > image_width || bbox.y + bbox.h > image_height) {
        throw Error("annotation on '" + image_id + "': bbox leaves the image");
    }
    if (mask.width != image_width || mask.height != image_height) {
        throw Error("annotation on '" + image_id + "': mask extent differs from image");
    }
    mask.validate();
    if (mask.popcount() == 0) {
        throw Error("annotation on '" + image_id + "': empty mask");
    }
    const BBox tight = mask.tight_bbox();
    if (tight.x < bbox.x || tight.y < bbox.y || tight.x + tight.w > bbox.x + bbox.w ||
        tight.y + tight.h > bbox.y + bbox.h) {
        throw Error("annotation on '" + image_id + "': mask support outside bbox");
    }
}

const ImageRecord* AnnotationSet::find_image(const std::string& id) const {
    for (const auto& img : images) {
        if (img.id == id) return &img;
    }
    return nullptr;
}

std::vector<WindowAnnotation> AnnotationSet::annotations_for(const std::string& image_id) const {
    std::vector<WindowAnnotation> out;
    for (const auto& ann : annotations) {
        if (ann.image_id == image_id) out.push_back(ann);
    }
    return out;
}

namespace {

json bbox_to_json(const BBox& box) {
    return json::array({box.x, box.y, box.w, box.h});
}

BBox bbox_from_json(const json& node) {
    if (!node.is_array() || node.size() != 4) {
        throw ParseError("bbox must be a 4-element array [x, y, w, h]");
    }
    return BBox{node[0].get<int>(), node[1].get<int>(), node[2].get<int>(), node[3].get<int>()};
}

json mask_to_json(const BinaryMask& mask) {
    return json{{"size", {mask.height, mask.width}}, {"counts", mask.runs}};
}

BinaryMask mask_from_json(const json& node) {
    if (!node.contains("size") || !node.contains("counts")) {
        throw ParseError("segmentation must carry 'size' and 'counts'");
    }
    BinaryMask mask;
    mask.height = node["size"][0].get<int>();
    mask.width = node["size"][1].get<int>();
    mask.runs = node["counts"].get<std::vector<std::uint32_t>>();
    mask.validate();
    return mask;
}

json parse_document(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
}

}  // namespace

std::string annotation_set_to_json(const AnnotationSet& set) {
    json images = json::array();
    for (const auto& img : set.images) {
        json record{{"id", img.id},
                    {"width", img.width},
                    {"height", img.height},
                    {"file_name", img.file_name}};
        if (!img.parent_id.empty()) record["parent_id"] = img.parent_id;
        images.push_back(std::move(record));
    }
    json annotations = json::array();
    int next_id = 1;
    for (const auto& ann : set.annotations) {
        annotations.push_back(json{{"id", next_id++},
                                   {"image_id", ann.image_id},
                                   {"bbox", bbox_to_json(ann.bbox)},
                                   {"segmentation", mask_to_json(ann.mask)},
                                   {"area", ann.mask.popcount()},
                                   {"category_id", 1}});
    }
    json doc{{"images", images},
             {"annotations", annotations},
             {"categories", json::array({json{{"id", 1}, {"name", "window"}}})}};
    return doc.dump(2) + "\n";
}

AnnotationSet annotation_set_from_json(const std::string& text) {
    const json doc = parse_document(text);
    AnnotationSet set;
    for (const auto& node : doc.value("images", json::array())) {
        ImageRecord img;
        img.id = node.at("id").get<std::string>();
        img.width = node.at("width").get<int>();
        img.height = node.at("height").get<int>();
        img.file_name = node.value("file_name", "");
        img.parent_id = node.value("parent_id", "");
        set.images.push_back(std::move(img));
    }
    for (const auto& node : doc.value("annotations", json::array())) {
        WindowAnnotation ann;
        ann.image_id = node.at("image_id").get<std::string>();
        ann.bbox = bbox_from_json(node.at("bbox"));
        ann.mask = mask_from_json(node.at("segmentation"));
        set.annotations.push_back(std::move(ann));
    }
    for (const auto& ann : set.annotations) {
        const ImageRecord* img = set.find_image(ann.image_id);
        if (!img) {
            throw ParseError("annotation references unknown image '" + ann.image_id + "'");
        }
        ann.validate(img->width, img->height);
    }
    return set;
}

std::string detections_to_json(const std::vector<Detection>& dets) {
    json arr = json::array();
    for (const auto& det : dets) {
        json node{{"image_id", det.image_id},
                  {"bbox", bbox_to_json(det.bbox)},
                  {"score", det.score},
                  {"category", det.class_label}};
        if (det.mask) node["segmentation"] = mask_to_json(*det.mask);
        arr.push_back(std::move(node));
    }
    return arr.dump(2) + "\n";
}

std::vector<Detection> detections_from_json(const std::string& text) {
    const json doc = parse_document(text);
    if (!doc.is_array()) {
        throw ParseError("detections file must be a JSON array");
    }
    std::vector<Detection> dets;
    for (const auto& node : doc) {
        Detection det;
        det.image_id = node.at("image_id").get<std::string>();
        det.bbox = bbox_from_json(node.at("bbox"));
        det.score = node.at("score").get<double>();
        det.class_label = node.value("category", "window");
        if (node.contains("segmentation")) det.mask = mask_from_json(node["segmentation"]);
        if (!(det.score >= 0.0 && det.score <= 1.0)) {
            throw ParseError("detection score outside [0, 1]");
        }
        if (!det.bbox.valid()) {
            throw ParseError("detection bbox invalid");
        }
        dets.push_back(std::move(det));
    }
    return dets;
}

void save_text(const std::string& text, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string load_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace facadewin
