#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace facadewin {

/// 8-bit RGB raster with identity and provenance. Pixels are row-major,
/// three bytes per pixel.
struct TextureImage {
    std::string id;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
    std::string source;

    static TextureImage filled(std::string id, int width, int height,
                               std::uint8_t r, std::uint8_t g, std::uint8_t b);

    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    std::uint8_t* at(int x, int y) {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }

    /// Throws Error when the buffer size disagrees with the extent.
    void validate() const;

    bool operator==(const TextureImage&) const = default;
};

/// Integer BT.601 luminance, rounded to the nearest level.
std::uint8_t luma601(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Reads a PNG or JPEG file (detected by magic bytes) into an RGB image.
/// Throws IoError on missing files and ParseError on undecodable content.
TextureImage read_image(const std::filesystem::path& path, const std::string& id = "");

void write_png(const TextureImage& image, const std::filesystem::path& path);

}  // namespace facadewin
