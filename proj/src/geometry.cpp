#include "facadewin/geometry.hpp"

#include <algorithm>
#include <cstdint>

#include "facadewin/errors.hpp"

namespace facadewin {

namespace {

std::int64_t overlap_1d(int a0, int a1, int b0, int b1) {
    const int lo = std::max(a0, b0);
    const int hi = std::min(a1, b1);
    return std::max(0, hi - lo);
}

// Iterates (value, length) pairs of an RLE stream, skipping empty runs.
struct RunCursor {
    const std::vector<std::uint32_t>& runs;
    std::size_t next = 0;
    std::uint8_t value = 0;
    std::uint64_t remaining = 0;

    explicit RunCursor(const std::vector<std::uint32_t>& r) : runs(r) { advance(); }

    void advance() {
        remaining = 0;
        while (remaining == 0 && next < runs.size()) {
            remaining = runs[next];
            value = next % 2 == 0 ? 0 : 1;
            ++next;
        }
    }
};

}  // namespace

double iou_box(const BBox& a, const BBox& b) {
    const std::int64_t ix = overlap_1d(a.x, a.x + a.w, b.x, b.x + b.w);
    const std::int64_t iy = overlap_1d(a.y, a.y + a.h, b.y, b.y + b.h);
    const std::int64_t inter = ix * iy;
    const std::int64_t uni = a.area() + b.area() - inter;
    if (uni <= 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask BinaryMask::encode(int width, int height, const std::vector<std::uint8_t>& dense) {
    if (width < 1 || height < 1) {
        throw CodecError("mask encode: dimensions must be positive");
    }
    const std::uint64_t total = static_cast<std::uint64_t>(width) * height;
    if (dense.size() != total) {
        throw CodecError("mask encode: dense buffer size does not match extent");
    }
    BinaryMask mask;
    mask.width = width;
    mask.height = height;
    std::uint8_t current = 0;
    std::uint32_t run = 0;
    for (std::uint64_t i = 0; i < total; ++i) {
        const std::uint8_t bit = dense[i] ? 1 : 0;
        if (bit == current) {
            ++run;
        } else {
            mask.runs.push_back(run);
            current = bit;
            run = 1;
        }
    }
    mask.runs.push_back(run);
    return mask;
}

std::vector<std::uint8_t> BinaryMask::decode() const {
    validate();
    const std::uint64_t total = static_cast<std::uint64_t>(width) * height;
    std::vector<std::uint8_t> dense(total, 0);
    std::uint64_t pos = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (i % 2 == 1) {
            std::fill(dense.begin() + pos, dense.begin() + pos + runs[i], std::uint8_t{1});
        }
        pos += runs[i];
    }
    return dense;
}

std::uint64_t BinaryMask::popcount() const {
    std::uint64_t count = 0;
    for (std::size_t i = 1; i < runs.size(); i += 2) count += runs[i];
    return count;
}

BBox BinaryMask::tight_bbox() const {
    validate();
    int min_x = width, max_x = -1, min_y = height, max_y = -1;
    std::uint64_t pos = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (i % 2 == 1 && runs[i] > 0) {
            // A 1-run spans linear indices [pos, pos + len) in column-major
            // order; walk it column by column.
            std::uint64_t begin = pos;
            const std::uint64_t end = pos + runs[i];
            while (begin < end) {
                const int x = static_cast<int>(begin / height);
                const int y0 = static_cast<int>(begin % height);
                const std::uint64_t col_end = std::min<std::uint64_t>(end, static_cast<std::uint64_t>(x + 1) * height);
                const int y1 = static_cast<int>((col_end - 1) % height);
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y0);
                max_y = std::max(max_y, y1);
                begin = col_end;
            }
        }
        pos += runs[i];
    }
    if (max_x < 0) return BBox{0, 0, 0, 0};
    return BBox{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
}

void BinaryMask::validate() const {
    if (width < 1 || height < 1) {
        throw CodecError("mask: dimensions must be positive");
    }
    std::uint64_t total = 0;
    for (const auto run : runs) total += run;
    const std::uint64_t expected = static_cast<std::uint64_t>(width) * height;
    if (total != expected) {
        throw CodecError("mask: runs sum to " + std::to_string(total) + ", expected " +
                         std::to_string(expected));
    }
}

double iou_mask(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height) {
        throw Error("mask IoU: extents differ");
    }
    a.validate();
    b.validate();
    RunCursor ca(a.runs), cb(b.runs);
    std::uint64_t inter = 0, uni = 0;
    while (ca.remaining > 0 && cb.remaining > 0) {
        const std::uint64_t step = std::min(ca.remaining, cb.remaining);
        if (ca.value && cb.value) inter += step;
        if (ca.value || cb.value) uni += step;
        ca.remaining -= step;
        cb.remaining -= step;
        if (ca.remaining == 0) ca.advance();
        if (cb.remaining == 0) cb.advance();
    }
    if (uni == 0) return 1.0;  // both empty
    return static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask mask_from_box(int width, int height, const BBox& box) {
    if (width < 1 || height < 1) {
        throw CodecError("mask_from_box: dimensions must be positive");
    }
    const int x0 = std::clamp(box.x, 0, width);
    const int x1 = std::clamp(box.x + box.w, 0, width);
    const int y0 = std::clamp(box.y, 0, height);
    const int y1 = std::clamp(box.y + box.h, 0, height);
    std::vector<std::uint8_t> dense(static_cast<std::size_t>(width) * height, 0);
    for (int x = x0; x < x1; ++x) {
        for (int y = y0; y < y1; ++y) {
            dense[static_cast<std::size_t>(x) * height + y] = 1;
        }
    }
    return BinaryMask::encode(width, height, dense);
}

BinaryMask crop_mask(const BinaryMask& mask, const BBox& window) {
    if (!window.valid()) {
        throw Error("crop_mask: invalid window");
    }
    const auto dense = mask.decode();
    std::vector<std::uint8_t> out(static_cast<std::size_t>(window.w) * window.h, 0);
    const int x0 = std::max(0, window.x);
    const int x1 = std::min(mask.width, window.x + window.w);
    const int y0 = std::max(0, window.y);
    const int y1 = std::min(mask.height, window.y + window.h);
    for (int x = x0; x < x1; ++x) {
        for (int y = y0; y < y1; ++y) {
            out[static_cast<std::size_t>(x - window.x) * window.h + (y - window.y)] =
                dense[static_cast<std::size_t>(x) * mask.height + y];
        }
    }
    return BinaryMask::encode(window.w, window.h, out);
}

BinaryMask rotate90_mask(const BinaryMask& mask, int quarter_turns) {
    int k = ((quarter_turns % 4) + 4) % 4;
    BinaryMask current = mask;
    while (k-- > 0) {
        const auto dense = current.decode();
        const int w = current.width, h = current.height;
        // Clockwise: (x, y) -> (h - 1 - y, x) in an h x w result.
        std::vector<std::uint8_t> rotated(static_cast<std::size_t>(w) * h, 0);
        for (int x = 0; x < w; ++x) {
            for (int y = 0; y < h; ++y) {
                const int nx = h - 1 - y;
                const int ny = x;
                rotated[static_cast<std::size_t>(nx) * w + ny] =
                    dense[static_cast<std::size_t>(x) * h + y];
            }
        }
        BinaryMask next = BinaryMask::encode(h, w, rotated);
        current = std::move(next);
    }
    return current;
}

}  // namespace facadewin
