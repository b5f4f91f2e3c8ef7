#pragma once

#include <filesystem>
#include <vector>

#include "facadewin/dataset.hpp"

namespace facadewin {

struct PrepOptions {
    int side = 128;
    std::uint64_t seed = 0;
    double min_visible = 0.5;
    bool paper_faithful = false;  // shuffle crops directly instead of by parent
    bool equalize = true;
};

struct PrepResult {
    std::vector<TextureImage> images;  // final equalized, rotated crops
    AnnotationSet annotations;
    std::vector<CropSpec> crops;
    DatasetSplit split;
};

/// Full dataset build: adaptive crops, annotation clipping, histogram
/// equalization, the four quarter-turn variants per crop, and the 6:2:2
/// split (grouped by parent texture unless paper_faithful).
PrepResult prep_dataset(const std::vector<TextureImage>& textures, const AnnotationSet& labels,
                        const PrepOptions& options);

/// Writes images/<id>.png plus annotations.json under dir.
void write_dataset(const std::filesystem::path& dir, const std::vector<TextureImage>& images,
                   const AnnotationSet& annotations);

AnnotationSet read_dataset_annotations(const std::filesystem::path& dir);

}  // namespace facadewin
