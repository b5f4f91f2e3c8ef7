#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "facadewin/errors.hpp"
#include "facadewin/geometry.hpp"
#include "facadewin/rng.hpp"
#include "oracles.hpp"

using namespace facadewin;

TEST_CASE("box IoU basics") {
    CHECK(iou_box(BBox{0, 0, 10, 10}, BBox{0, 0, 10, 10}) == doctest::Approx(1.0));
    CHECK(iou_box(BBox{0, 0, 10, 10}, BBox{20, 20, 5, 5}) == 0.0);
    // 50 shared pixels over 150 distinct ones, frozen from the pixel oracle.
    const BBox a{0, 0, 10, 10}, b{5, 0, 10, 10};
    const double expected = oracles::pixel_iou_box(a, b);
    CHECK(expected == doctest::Approx(50.0 / 150.0).epsilon(1e-15));
    CHECK(iou_box(a, b) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("box IoU matches the pixel enumeration oracle on random boxes") {
    DetRng rng(20240901);
    for (int trial = 0; trial < 300; ++trial) {
        const BBox a{rng.uniform_int(0, 40), rng.uniform_int(0, 40), rng.uniform_int(1, 20),
                     rng.uniform_int(1, 20)};
        const BBox b{rng.uniform_int(0, 40), rng.uniform_int(0, 40), rng.uniform_int(1, 20),
                     rng.uniform_int(1, 20)};
        CHECK(iou_box(a, b) == doctest::Approx(oracles::pixel_iou_box(a, b)).epsilon(1e-12));
        CHECK(iou_box(a, b) == iou_box(b, a));
    }
}

TEST_CASE("mask IoU on offset squares") {
    // Two 10x10 masks holding 6x6 squares offset by 3 px horizontally:
    // the bit-enumeration oracle gives 18 shared of 54 total set pixels.
    const auto ga = oracles::Grid::filled_box(10, 10, 1, 2, 6, 6);
    const auto gb = oracles::Grid::filled_box(10, 10, 4, 2, 6, 6);
    CHECK(oracles::grid_iou(ga, gb) == doctest::Approx(18.0 / 54.0).epsilon(1e-15));

    const BinaryMask a = mask_from_box(10, 10, BBox{1, 2, 6, 6});
    const BinaryMask b = mask_from_box(10, 10, BBox{4, 2, 6, 6});
    CHECK(iou_mask(a, b) == doctest::Approx(18.0 / 54.0).epsilon(1e-15));
    CHECK(iou_mask(a, a) == 1.0);
    CHECK(iou_mask(a, b) == iou_mask(b, a));
}

TEST_CASE("mask IoU handles disjoint and empty masks") {
    const BinaryMask a = mask_from_box(8, 8, BBox{0, 0, 3, 3});
    const BinaryMask b = mask_from_box(8, 8, BBox{5, 5, 3, 3});
    CHECK(iou_mask(a, b) == 0.0);
    const BinaryMask empty1 = mask_from_box(8, 8, BBox{0, 0, 0, 0});
    const BinaryMask empty2 = mask_from_box(8, 8, BBox{0, 0, 0, 0});
    CHECK(iou_mask(empty1, empty2) == 1.0);
    CHECK_THROWS_AS(iou_mask(a, mask_from_box(9, 8, BBox{0, 0, 3, 3})), Error);
}

TEST_CASE("RLE codec canonical forms") {
    const std::vector<std::uint8_t> zeros(16, 0);
    CHECK(BinaryMask::encode(4, 4, zeros).runs == std::vector<std::uint32_t>{16});
    const std::vector<std::uint8_t> ones(16, 1);
    CHECK(BinaryMask::encode(4, 4, ones).runs == std::vector<std::uint32_t>{0, 16});
}

TEST_CASE("RLE round-trip on random bitmaps") {
    DetRng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint8_t> dense(16 * 16);
        for (auto& bit : dense) bit = rng.next_u64() & 1;
        const BinaryMask mask = BinaryMask::encode(16, 16, dense);
        CHECK(mask.decode() == dense);
    }
}

TEST_CASE("codec rejects runs that do not sum to the extent") {
    BinaryMask bad;
    bad.width = 4;
    bad.height = 4;
    bad.runs = {10, 3};
    CHECK_THROWS_AS(bad.validate(), CodecError);
    CHECK_THROWS_AS(bad.decode(), CodecError);
}

TEST_CASE("box IoU agrees with mask IoU for filled boxes") {
    DetRng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const BBox a{rng.uniform_int(0, 20), rng.uniform_int(0, 20), rng.uniform_int(1, 12),
                     rng.uniform_int(1, 12)};
        const BBox b{rng.uniform_int(0, 20), rng.uniform_int(0, 20), rng.uniform_int(1, 12),
                     rng.uniform_int(1, 12)};
        const BinaryMask ma = mask_from_box(32, 32, a);
        const BinaryMask mb = mask_from_box(32, 32, b);
        CHECK(iou_box(a, b) == doctest::Approx(iou_mask(ma, mb)).epsilon(1e-12));
    }
}

TEST_CASE("tight bbox and popcount") {
    const BinaryMask mask = mask_from_box(12, 9, BBox{3, 2, 4, 5});
    CHECK(mask.popcount() == 20);
    CHECK(mask.tight_bbox() == BBox{3, 2, 4, 5});
    const BinaryMask empty = mask_from_box(12, 9, BBox{0, 0, 0, 0});
    CHECK(empty.tight_bbox() == BBox{0, 0, 0, 0});
}

TEST_CASE("mask rotation: four quarter turns are the identity") {
    DetRng rng(123);
    std::vector<std::uint8_t> dense(20 * 20);
    for (auto& bit : dense) bit = rng.next_u64() & 1;
    const BinaryMask mask = BinaryMask::encode(20, 20, dense);
    BinaryMask turned = mask;
    for (int k = 0; k < 4; ++k) turned = rotate90_mask(turned, 1);
    CHECK(turned == mask);
    CHECK(rotate90_mask(mask, 4) == mask);
}

TEST_CASE("mask rotation matches the grid oracle") {
    DetRng rng(321);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::uint8_t> dense(15 * 15);
        for (auto& bit : dense) bit = rng.next_u64() & 1;
        const BinaryMask mask = BinaryMask::encode(15, 15, dense);
        const auto rotated = rotate90_mask(mask, 1);
        const auto expected = oracles::rotate_grid_cw(oracles::grid_from_mask(mask));
        CHECK(oracles::grid_from_mask(rotated).cells == expected.cells);
    }
}

TEST_CASE("bbox IoU survives a 90-degree rotation round trip") {
    // Rotating an annotation four times must land exactly on itself.
    const int side = 64;
    const BBox box{10, 20, 12, 7};
    BBox current = box;
    for (int k = 0; k < 4; ++k) {
        current = BBox{side - current.y - current.h, current.x, current.h, current.w};
    }
    CHECK(iou_box(box, current) == 1.0);
}

TEST_CASE("crop_mask clips and re-anchors") {
    const BinaryMask mask = mask_from_box(20, 20, BBox{8, 4, 10, 10});
    const BinaryMask clipped = crop_mask(mask, BBox{10, 0, 6, 20});
    CHECK(clipped.width == 6);
    CHECK(clipped.height == 20);
    CHECK(clipped.popcount() == 60);  // columns 10..15 of the 10-wide box
    CHECK(clipped.tight_bbox() == BBox{0, 4, 6, 10});
}
