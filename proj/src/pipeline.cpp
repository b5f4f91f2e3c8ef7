#include "facadewin/pipeline.hpp"

#include <algorithm>

#include "facadewin/errors.hpp"

namespace facadewin {

PrepResult prep_dataset(const std::vector<TextureImage>& textures, const AnnotationSet& labels,
                        const PrepOptions& options) {
    if (textures.empty()) throw Error("prep: no input textures");
    PrepResult result;
    std::vector<std::pair<std::string, std::string>> id_and_parent;

    for (const auto& texture : textures) {
        texture.validate();
        const auto parent_annotations = labels.annotations_for(texture.id);
        for (const auto& crop :
             adaptive_crops(texture.width, texture.height, options.side, texture.id)) {
            TextureImage crop_img = crop_image(texture, crop);
            if (options.equalize) crop_img = equalize_histogram(crop_img);
            auto clipped = crop_annotations(parent_annotations, crop, options.min_visible);
            for (auto& variant : rotate90_augment(crop_img, clipped)) {
                ImageRecord record;
                record.id = variant.image.id;
                record.width = variant.image.width;
                record.height = variant.image.height;
                record.file_name = variant.image.id + ".png";
                record.parent_id = texture.id;
                result.annotations.images.push_back(record);
                for (auto& ann : variant.annotations) {
                    result.annotations.annotations.push_back(std::move(ann));
                }
                id_and_parent.emplace_back(variant.image.id, texture.id);
                result.images.push_back(std::move(variant.image));
            }
            result.crops.push_back(crop);
        }
    }

    if (options.paper_faithful) {
        std::vector<std::string> ids;
        ids.reserve(id_and_parent.size());
        for (const auto& [id, parent] : id_and_parent) ids.push_back(id);
        result.split = split_dataset(std::move(ids), options.seed);
    } else {
        result.split = split_dataset_grouped(id_and_parent, options.seed);
    }
    return result;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<TextureImage>& images,
                   const AnnotationSet& annotations) {
    std::filesystem::create_directories(dir / "images");
    for (const auto& image : images) {
        write_png(image, dir / "images" / (image.id + ".png"));
    }
    save_text(annotation_set_to_json(annotations), dir / "annotations.json");
}

AnnotationSet read_dataset_annotations(const std::filesystem::path& dir) {
    const auto path = dir / "annotations.json";
    if (!std::filesystem::is_regular_file(path)) {
        throw IoError("dataset has no annotations.json: " + dir.string());
    }
    return annotation_set_from_json(load_text(path));
}

}  // namespace facadewin
