#pragma once

#include <cstdint>
#include <vector>

namespace facadewin {

/// Axis-aligned pixel box covering the half-open lattice
/// [x, x+w) x [y, y+h). Width and height are at least 1 for a valid box.
struct BBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool valid() const { return w >= 1 && h >= 1 && x >= 0 && y >= 0; }
    std::int64_t area() const { return static_cast<std::int64_t>(w) * h; }

    bool operator==(const BBox&) const = default;
};

/// Intersection-over-union of two boxes, exact integer counts divided once.
double iou_box(const BBox& a, const BBox& b);

/// Binary mask stored as column-major run-length encoding. Runs alternate
/// between 0-pixels and 1-pixels and always start with a (possibly empty)
/// 0-run. Pixel (x, y) sits at linear index x * height + y.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> runs;

    /// Builds the canonical encoding of a dense column-major bitmap.
    /// Throws CodecError on empty dimensions or buffer size mismatch.
    static BinaryMask encode(int width, int height, const std::vector<std::uint8_t>& dense);

    /// Expands the runs back to a dense column-major bitmap.
    /// Throws CodecError when the runs do not sum to width * height.
    std::vector<std::uint8_t> decode() const;

    std::uint64_t popcount() const;
    bool empty() const { return popcount() == 0; }

    /// Tight bounding box of the set pixels; {0,0,0,0} for an empty mask.
    BBox tight_bbox() const;

    /// Throws CodecError when the run sum does not match the extent.
    void validate() const;

    bool operator==(const BinaryMask&) const = default;
};

/// Mask IoU via a joint walk over both run sequences. Both-empty is 1.0.
/// Throws Error on dimension mismatch.
double iou_mask(const BinaryMask& a, const BinaryMask& b);

/// Filled-rectangle mask of the given extent. The box is clipped to the
/// extent; a box entirely outside yields an empty mask.
BinaryMask mask_from_box(int width, int height, const BBox& box);

/// Restricts the mask to `window` and re-anchors it at the window origin.
/// The result has the window's extent.
BinaryMask crop_mask(const BinaryMask& mask, const BBox& window);

/// Rotates the mask clockwise by `quarter_turns` 90-degree steps.
BinaryMask rotate90_mask(const BinaryMask& mask, int quarter_turns);

}  // namespace facadewin
