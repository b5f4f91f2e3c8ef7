#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "facadewin/dataset.hpp"
#include "facadewin/errors.hpp"
#include "facadewin/rng.hpp"
#include "oracles.hpp"

using namespace facadewin;

namespace {

std::vector<int> x_origins(const std::vector<CropSpec>& crops) {
    std::set<int> xs;
    for (const auto& crop : crops) xs.insert(crop.origin_x);
    return {xs.begin(), xs.end()};
}

WindowAnnotation make_window(const std::string& image_id, int img_w, int img_h, const BBox& box) {
    WindowAnnotation ann;
    ann.image_id = image_id;
    ann.bbox = box;
    ann.mask = mask_from_box(img_w, img_h, box);
    return ann;
}

}  // namespace

TEST_CASE("adaptive crops: exact fit gives a single crop") {
    const auto crops = adaptive_crops(128, 128, 128, "t");
    REQUIRE(crops.size() == 1);
    CHECK(crops[0].origin_x == 0);
    CHECK(crops[0].origin_y == 0);
}

TEST_CASE("adaptive crops: 300x300 at side 128") {
    // Hand-executed stride rule: stride ceil(0.9*128) = 116, interior
    // origins 0 and 116, final origin clamped to 300-128 = 172.
    const auto crops = adaptive_crops(300, 300, 128, "t");
    CHECK(crops.size() == 9);
    CHECK(x_origins(crops) == std::vector<int>{0, 116, 172});
    CHECK(oracles::crops_cover_image(300, 300, crops));
    // Document order: row-major over (y, x), indices sequential.
    for (std::size_t i = 0; i < crops.size(); ++i) {
        CHECK(crops[i].index == static_cast<int>(i));
    }
}

TEST_CASE("adaptive crops: 250x128 keeps the clamped origin") {
    const auto crops = adaptive_crops(250, 128, 128, "t");
    CHECK(x_origins(crops) == std::vector<int>{0, 116, 122});
    CHECK(oracles::crops_cover_image(250, 128, crops));
}

TEST_CASE("adaptive crops: too-small image errors") {
    CHECK_THROWS_WITH_AS(adaptive_crops(100, 300, 128), "image too small to crop", Error);
}

TEST_CASE("adaptive crops: coverage and interior overlap on random sizes") {
    DetRng rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        const int w = rng.uniform_int(128, 512);
        const int h = rng.uniform_int(128, 512);
        const auto crops = adaptive_crops(w, h, 128, "t");
        CHECK(oracles::crops_cover_image(w, h, crops));
        const auto xs = x_origins(crops);
        for (std::size_t i = 0; i + 2 < xs.size(); ++i) {
            // Interior pairs only; the clamped final origin is exempt.
            const int overlap = 128 - (xs[i + 1] - xs[i]);
            CHECK(overlap <= 12);  // 10% of 128, floored
        }
    }
}

TEST_CASE("crop_annotations translation, drop and boundary clip") {
    const CropSpec crop{"t", 100, 100, 128, 0};

    SUBCASE("fully inside: translated only") {
        const auto input = make_window("t", 300, 300, BBox{150, 160, 10, 12});
        const auto out = crop_annotations({input}, crop, 0.5);
        REQUIRE(out.size() == 1);
        CHECK(out[0].bbox == BBox{50, 60, 10, 12});
        CHECK(out[0].mask.popcount() == 120);
        CHECK(out[0].image_id == "t_c000");
    }
    SUBCASE("fully outside: dropped") {
        const auto input = make_window("t", 300, 300, BBox{0, 0, 10, 10});
        CHECK(crop_annotations({input}, crop, 0.5).empty());
    }
    SUBCASE("half visible at min_visible 0.5 is kept and clipped to 5x10") {
        // 10x10 window straddling the left crop edge: 50 of 100 px visible.
        const auto input = make_window("t", 300, 300, BBox{95, 120, 10, 10});
        const auto out = crop_annotations({input}, crop, 0.5);
        REQUIRE(out.size() == 1);
        CHECK(out[0].bbox == BBox{0, 20, 5, 10});
        CHECK(out[0].mask.popcount() == 50);
    }
    SUBCASE("49 of 100 px visible is dropped") {
        const auto input = make_window("t", 300, 300, BBox{95, 221, 10, 10});
        // 5x7 visible = 35 < 50.
        const auto out = crop_annotations({input}, crop, 0.5);
        CHECK(out.empty());
    }
}

TEST_CASE("equalization: constant image is unchanged") {
    const auto image = TextureImage::filled("gray", 16, 16, 90, 90, 90);
    CHECK(equalize_histogram(image) == image);
}

TEST_CASE("equalization: two-level image is a remap fixed point") {
    // Hand CDF for the 2-bin histogram {0: N/2, 255: N/2}: lut[0] = 0 and
    // lut[255] = 255, so the image survives unchanged.
    TextureImage image = TextureImage::filled("two", 16, 16, 0, 0, 0);
    for (int y = 0; y < 16; ++y) {
        for (int x = 8; x < 16; ++x) {
            auto* px = image.at(x, y);
            px[0] = px[1] = px[2] = 255;
        }
    }
    const auto lut = equalization_lut(image);
    CHECK(lut[0] == 0);
    CHECK(lut[255] == 255);
    CHECK(equalize_histogram(image) == image);
}

TEST_CASE("equalization: linear ramp keeps a uniform luminance histogram") {
    TextureImage image = TextureImage::filled("ramp", 256, 8, 0, 0, 0);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 256; ++x) {
            auto* px = image.at(x, y);
            px[0] = px[1] = px[2] = static_cast<std::uint8_t>(x);
        }
    }
    const auto out = equalize_histogram(image);
    std::array<int, 256> hist{};
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 256; ++x) {
            const auto* px = out.at(x, y);
            hist[luma601(px[0], px[1], px[2])]++;
        }
    }
    for (const int count : hist) {
        CHECK(count >= 7);
        CHECK(count <= 9);
    }
}

TEST_CASE("equalization: output luminance is exactly the remapped level") {
    DetRng rng(2024);
    TextureImage image = TextureImage::filled("noise", 32, 32, 0, 0, 0);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            auto* px = image.at(x, y);
            // Low-contrast colored noise, the case equalization exists for.
            px[0] = static_cast<std::uint8_t>(90 + rng.uniform_int(0, 50));
            px[1] = static_cast<std::uint8_t>(100 + rng.uniform_int(0, 40));
            px[2] = static_cast<std::uint8_t>(80 + rng.uniform_int(0, 60));
        }
    }
    const auto lut = equalization_lut(image);
    for (int v = 1; v < 256; ++v) CHECK(lut[v] >= lut[v - 1]);
    const auto out = equalize_histogram(image);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            const auto* in_px = image.at(x, y);
            const auto* out_px = out.at(x, y);
            const int expected = lut[luma601(in_px[0], in_px[1], in_px[2])];
            CHECK(static_cast<int>(luma601(out_px[0], out_px[1], out_px[2])) == expected);
        }
    }
}

TEST_CASE("equalization preserves intensity ordering") {
    DetRng rng(5150);
    TextureImage image = TextureImage::filled("ord", 24, 24, 0, 0, 0);
    for (auto& channel : image.pixels) channel = static_cast<std::uint8_t>(rng.bounded(256));
    const auto out = equalize_histogram(image);
    const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
    std::vector<std::uint8_t> lum_in(n), lum_out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto* ip = image.pixels.data() + i * 3;
        const auto* op = out.pixels.data() + i * 3;
        lum_in[i] = luma601(ip[0], ip[1], ip[2]);
        lum_out[i] = luma601(op[0], op[1], op[2]);
    }
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (lum_in[p] >= lum_in[q]) {
                CHECK(lum_out[p] >= lum_out[q]);
            } else {
                CHECK(lum_out[p] <= lum_out[q]);
            }
        }
    }
}

TEST_CASE("rotation: k=0 is the identity and four turns are bit-exact") {
    DetRng rng(11);
    TextureImage image = TextureImage::filled("sq", 32, 32, 0, 0, 0);
    for (auto& channel : image.pixels) channel = static_cast<std::uint8_t>(rng.bounded(256));
    CHECK(rotate90_image(image, 0) == image);
    TextureImage turned = image;
    for (int k = 0; k < 4; ++k) turned = rotate90_image(turned, 1);
    CHECK(turned == image);
}

TEST_CASE("rotation rejects non-square images") {
    const auto image = TextureImage::filled("rect", 32, 16, 0, 0, 0);
    CHECK_THROWS_AS(rotate90_image(image, 1), Error);
    CHECK_THROWS_AS(rotate90_augment(image, {}), Error);
}

TEST_CASE("rotation: clockwise bbox transform matches the mask oracle") {
    // 128^2 crop, window bbox (10,20,30,40), one clockwise turn:
    // (128-20-40, 10, 40, 30) = (68, 10, 40, 30).
    const auto ann = make_window("c", 128, 128, BBox{10, 20, 30, 40});
    const auto rotated = rotate90_annotation(ann, 128, 1, "c_r1");
    CHECK(rotated.bbox == BBox{68, 10, 40, 30});

    const auto expected_grid = oracles::rotate_grid_cw(oracles::grid_from_mask(ann.mask));
    CHECK(oracles::grid_tight_box(expected_grid) == rotated.bbox);
    CHECK(oracles::grid_from_mask(rotated.mask).cells == expected_grid.cells);
}

TEST_CASE("rotation augmentation yields 4 variants preserving windows") {
    DetRng rng(77);
    TextureImage image = TextureImage::filled("crop", 64, 64, 0, 0, 0);
    for (auto& channel : image.pixels) channel = static_cast<std::uint8_t>(rng.bounded(256));
    const std::vector<WindowAnnotation> anns = {make_window("crop", 64, 64, BBox{5, 9, 10, 14}),
                                                make_window("crop", 64, 64, BBox{40, 30, 8, 6})};
    const auto variants = rotate90_augment(image, anns);
    REQUIRE(variants.size() == 4);
    CHECK(variants[0].image.pixels == image.pixels);
    for (const auto& variant : variants) {
        CHECK(variant.annotations.size() == anns.size());
        for (std::size_t i = 0; i < anns.size(); ++i) {
            CHECK(variant.annotations[i].mask.popcount() == anns[i].mask.popcount());
            variant.annotations[i].validate(64, 64);
        }
    }
    CHECK(variants[1].image.id == "crop_r1");
}

TEST_CASE("split: ratios and determinism") {
    std::vector<std::string> ids;
    for (int i = 0; i < 100; ++i) ids.push_back("img" + std::to_string(i));
    const auto split = split_dataset(ids, 3);
    CHECK(split.train.size() == 60);
    CHECK(split.val.size() == 20);
    CHECK(split.test.size() == 20);

    const auto again = split_dataset(ids, 3);
    CHECK(split.train == again.train);
    CHECK(split.val == again.val);
    CHECK(split.test == again.test);

    std::set<std::string> all(split.train.begin(), split.train.end());
    all.insert(split.val.begin(), split.val.end());
    all.insert(split.test.begin(), split.test.end());
    CHECK(all.size() == ids.size());
}

TEST_CASE("split: 10 ids give exactly 6/2/2") {
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back(std::to_string(i));
    const auto split = split_dataset(ids, 0);
    CHECK(split.train.size() == 6);
    CHECK(split.val.size() == 2);
    CHECK(split.test.size() == 2);
}

TEST_CASE("split: different seeds permute differently on 1000 ids") {
    std::vector<std::string> ids;
    for (int i = 0; i < 1000; ++i) ids.push_back(std::to_string(i));
    const auto a = split_dataset(ids, 1);
    const auto b = split_dataset(ids, 2);
    CHECK(a.train != b.train);
}

TEST_CASE("split: duplicate ids error") {
    CHECK_THROWS_AS(split_dataset({"a", "b", "a"}, 0), Error);
}

TEST_CASE("split: floor-rule boundaries avoid float drift") {
    std::vector<std::string> ids;
    for (int i = 0; i < 35; ++i) ids.push_back(std::to_string(i));
    const auto split = split_dataset(ids, 9);
    CHECK(split.train.size() == 21);  // floor(0.6 * 35) = 21 exactly
    CHECK(split.val.size() == 7);
    CHECK(split.test.size() == 7);
}

TEST_CASE("grouped split keeps all crops of a parent together") {
    std::vector<std::pair<std::string, std::string>> id_and_parent;
    for (int p = 0; p < 10; ++p) {
        for (int c = 0; c < 4; ++c) {
            id_and_parent.emplace_back("p" + std::to_string(p) + "_c" + std::to_string(c),
                                       "p" + std::to_string(p));
        }
    }
    const auto split = split_dataset_grouped(id_and_parent, 5);
    CHECK(split.total() == 40);
    CHECK(split.train.size() == 24);  // 6 of 10 parents
    CHECK(split.val.size() == 8);
    CHECK(split.test.size() == 8);
    auto bucket = [&](const std::string& id) {
        for (const auto& x : split.train)
            if (x == id) return 0;
        for (const auto& x : split.val)
            if (x == id) return 1;
        return 2;
    };
    for (int p = 0; p < 10; ++p) {
        const std::string parent = "p" + std::to_string(p);
        const int first = bucket(parent + "_c0");
        for (int c = 1; c < 4; ++c) CHECK(bucket(parent + "_c" + std::to_string(c)) == first);
    }
}

TEST_CASE("split JSON round trip") {
    const auto split = split_dataset({"a", "b", "c", "d", "e"}, 17);
    const auto loaded = split_from_json(split_to_json(split));
    CHECK(loaded.train == split.train);
    CHECK(loaded.val == split.val);
    CHECK(loaded.test == split.test);
    CHECK(loaded.seed == 17);
}

TEST_CASE("equalization commutes with rotation") {
    DetRng rng(31337);
    TextureImage image = TextureImage::filled("c", 32, 32, 0, 0, 0);
    for (auto& channel : image.pixels) channel = static_cast<std::uint8_t>(rng.bounded(256));
    const auto a = equalize_histogram(rotate90_image(image, 1));
    auto b = rotate90_image(equalize_histogram(image), 1);
    b.id = a.id;
    CHECK(a.pixels == b.pixels);
}
