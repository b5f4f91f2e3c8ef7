#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "facadewin/annotations.hpp"
#include "facadewin/image.hpp"

namespace facadewin {

/// A square window into a parent texture.
struct CropSpec {
    std::string parent_id;
    int origin_x = 0;
    int origin_y = 0;
    int side = 0;
    int index = 0;

    std::string image_id() const;
    BBox window() const { return BBox{origin_x, origin_y, side, side}; }
};

/// Tiling with a per-axis stride of ceil(0.9 * side), so consecutive
/// interior crops overlap at most 10% of the side. The last origin per
/// axis is clamped to dim - side; that crop alone may overlap more, which
/// is the price of covering the whole image. Origins are deduplicated.
/// Throws Error("image too small to crop") when either dimension < side.
std::vector<CropSpec> adaptive_crops(int width, int height, int side,
                                     const std::string& parent_id = "");

/// Clips annotations to a crop window and re-anchors them at the crop
/// origin. A window survives iff its visible mask area is at least
/// min_visible times its original area; survivors get a tight bbox
/// recomputed from the clipped mask.
std::vector<WindowAnnotation> crop_annotations(const std::vector<WindowAnnotation>& annotations,
                                               const CropSpec& crop,
                                               double min_visible = 0.5,
                                               const std::string& crop_image_id = "");

TextureImage crop_image(const TextureImage& image, const CropSpec& crop);

/// Histogram equalization of BT.601 luminance via the usual CDF remap.
/// Chroma is carried over by scaling each pixel's offset from its own
/// luminance, shrunk just enough to stay inside the RGB cube; channel
/// rounding is ordered so the output luminance lands exactly on the
/// remapped level. Single-luminance images come back unchanged.
TextureImage equalize_histogram(const TextureImage& image);

/// The remap table equalize_histogram applies, exposed for inspection.
/// Monotone non-decreasing by construction.
std::vector<std::uint8_t> equalization_lut(const TextureImage& image);

/// Pixel-exact clockwise rotation by quarter turns. Square input only.
TextureImage rotate90_image(const TextureImage& image, int quarter_turns);

/// Rotates an annotation along with its (square, side x side) image.
WindowAnnotation rotate90_annotation(const WindowAnnotation& annotation, int side,
                                     int quarter_turns, const std::string& new_image_id);

struct RotatedVariant {
    int quarter_turns = 0;
    TextureImage image;
    std::vector<WindowAnnotation> annotations;
};

/// All four quarter-turn variants (k = 0 is the input itself). Image ids
/// get a "_r<k>" suffix.
std::vector<RotatedVariant> rotate90_augment(const TextureImage& image,
                                             const std::vector<WindowAnnotation>& annotations);

/// Disjoint train/val/test id lists in ratio 6:2:2.
struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
    std::uint64_t seed = 0;

    std::size_t total() const { return train.size() + val.size() + test.size(); }
};

/// Seeded shuffle, then floor(0.6 n) ids to train, floor(0.2 n) to val,
/// the rest to test. Throws Error on duplicate ids.
DatasetSplit split_dataset(std::vector<std::string> ids, std::uint64_t seed);

/// Leakage-safe variant: the 6:2:2 rule is applied to the distinct group
/// keys (parent textures), and every id inherits its group's partition, so
/// overlapping crops of one texture never straddle train and test.
DatasetSplit split_dataset_grouped(const std::vector<std::pair<std::string, std::string>>& id_and_group,
                                   std::uint64_t seed);

std::string split_to_json(const DatasetSplit& split);
DatasetSplit split_from_json(const std::string& text);

std::string crops_to_json(const std::vector<CropSpec>& crops);
std::vector<CropSpec> crops_from_json(const std::string& text);

}  // namespace facadewin
