#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "facadewin/image.hpp"

namespace facadewin {

/// One facade texture reference found in a CityGML appearance.
struct TextureManifestEntry {
    std::string texture_path;
    std::string surface_id;
    std::vector<std::pair<double, double>> tex_coords;
    int image_width = 0;   // 0 until the file is loaded
    int image_height = 0;

    bool operator==(const TextureManifestEntry&) const = default;
};

struct TextureManifest {
    std::vector<TextureManifestEntry> entries;
    int skipped_refs = 0;  // texture elements without a usable imageURI
};

/// Scans a CityGML 2.0 document for ParameterizedTexture appearances and
/// returns one entry per texture target, in document order. Texture
/// references without an imageURI are skipped and counted. Georeferenced
/// textures and plain materials are ignored. Throws ParseError (with line
/// and column) on malformed XML.
TextureManifest parse_citygml(const std::string& xml_text);

struct TextureLoadResult {
    std::vector<TextureImage> images;
    std::vector<std::string> missing;  // manifest paths that did not resolve
};

/// Loads every resolvable entry relative to root_dir and back-fills the
/// manifest's image dimensions. Missing files are reported, not fatal.
/// Throws IoError when root_dir itself is absent.
TextureLoadResult load_textures(TextureManifest& manifest,
                                const std::filesystem::path& root_dir);

std::string manifest_to_json(const TextureManifest& manifest);
TextureManifest manifest_from_json(const std::string& text);

}  // namespace facadewin
