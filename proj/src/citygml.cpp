#include "facadewin/citygml.hpp"

#include <expat.h>

#include <cmath>
#include <cstring>
#include <json.hpp>
#include <sstream>

#include "facadewin/errors.hpp"

namespace facadewin {

using nlohmann::json;

namespace {

std::string local_name(const char* qualified) {
    const char* colon = std::strrchr(qualified, ':');
    return colon ? std::string(colon + 1) : std::string(qualified);
}

/// Texture reference being assembled while its element is open.
struct PendingTexture {
    std::string image_uri;
    struct Target {
        std::string surface_id;
        std::vector<std::pair<double, double>> coords;
        bool coords_bad = false;
    };
    std::vector<Target> targets;
};

struct SaxState {
    TextureManifest manifest;
    std::vector<std::string> stack;
    PendingTexture texture;
    int texture_depth = -1;  // stack depth of the open ParameterizedTexture
    int target_depth = -1;
    std::string text;        // character data of the innermost capture
    bool capturing = false;

    bool inside_texture() const { return texture_depth >= 0; }
    bool inside_target() const { return target_depth >= 0; }
};

bool parse_coordinate_list(const std::string& text,
                           std::vector<std::pair<double, double>>& coords) {
    std::istringstream in(text);
    std::vector<double> values;
    double value = 0.0;
    while (in >> value) {
        if (!std::isfinite(value)) return false;
        values.push_back(value);
    }
    if (!in.eof()) return false;       // trailing garbage
    if (values.size() % 2 != 0) return false;
    for (std::size_t i = 0; i < values.size(); i += 2) {
        coords.emplace_back(values[i], values[i + 1]);
    }
    return true;
}

void on_start_element(void* user_data, const XML_Char* name, const XML_Char** attrs) {
    auto* state = static_cast<SaxState*>(user_data);
    const std::string local = local_name(name);
    state->stack.push_back(local);

    if (local == "ParameterizedTexture" && !state->inside_texture()) {
        state->texture = PendingTexture{};
        state->texture_depth = static_cast<int>(state->stack.size());
    } else if (state->inside_texture() && local == "target" && !state->inside_target()) {
        PendingTexture::Target target;
        for (const XML_Char** attr = attrs; attr && *attr; attr += 2) {
            if (local_name(attr[0]) == "uri") {
                target.surface_id = attr[1];
                if (!target.surface_id.empty() && target.surface_id.front() == '#') {
                    target.surface_id.erase(target.surface_id.begin());
                }
            }
        }
        state->texture.targets.push_back(std::move(target));
        state->target_depth = static_cast<int>(state->stack.size());
    } else if (state->inside_texture() &&
               (local == "imageURI" || local == "textureCoordinates")) {
        state->text.clear();
        state->capturing = true;
    }
}

void on_end_element(void* user_data, const XML_Char* name) {
    auto* state = static_cast<SaxState*>(user_data);
    const std::string local = local_name(name);

    if (state->capturing && local == "imageURI" && state->inside_texture()) {
        state->texture.image_uri = state->text;
        // Trim surrounding whitespace.
        const auto begin = state->texture.image_uri.find_first_not_of(" \t\r\n");
        const auto end = state->texture.image_uri.find_last_not_of(" \t\r\n");
        state->texture.image_uri =
            begin == std::string::npos
                ? std::string()
                : state->texture.image_uri.substr(begin, end - begin + 1);
        state->capturing = false;
    } else if (state->capturing && local == "textureCoordinates" && state->inside_target()) {
        auto& target = state->texture.targets.back();
        if (!parse_coordinate_list(state->text, target.coords) ||
            (!target.coords.empty() && target.coords.size() < 3)) {
            target.coords_bad = true;
            target.coords.clear();
        }
        state->capturing = false;
    }

    if (state->inside_target() &&
        static_cast<int>(state->stack.size()) == state->target_depth && local == "target") {
        state->target_depth = -1;
    }
    if (state->inside_texture() &&
        static_cast<int>(state->stack.size()) == state->texture_depth &&
        local == "ParameterizedTexture") {
        // Emit entries now that the whole texture element is known.
        if (state->texture.image_uri.empty()) {
            state->manifest.skipped_refs++;
        } else if (state->texture.targets.empty()) {
            TextureManifestEntry entry;
            entry.texture_path = state->texture.image_uri;
            state->manifest.entries.push_back(std::move(entry));
        } else {
            for (auto& target : state->texture.targets) {
                if (target.coords_bad) {
                    state->manifest.skipped_refs++;
                    continue;
                }
                TextureManifestEntry entry;
                entry.texture_path = state->texture.image_uri;
                entry.surface_id = std::move(target.surface_id);
                entry.tex_coords = std::move(target.coords);
                state->manifest.entries.push_back(std::move(entry));
            }
        }
        state->texture_depth = -1;
    }
    state->stack.pop_back();
}

void on_character_data(void* user_data, const XML_Char* data, int len) {
    auto* state = static_cast<SaxState*>(user_data);
    if (state->capturing) state->text.append(data, static_cast<std::size_t>(len));
}

}  // namespace

TextureManifest parse_citygml(const std::string& xml_text) {
    XML_Parser parser = XML_ParserCreate(nullptr);
    if (!parser) throw Error("xml: parser allocation failed");

    SaxState state;
    XML_SetUserData(parser, &state);
    XML_SetElementHandler(parser, on_start_element, on_end_element);
    XML_SetCharacterDataHandler(parser, on_character_data);

    const XML_Status status = XML_Parse(parser, xml_text.data(),
                                        static_cast<int>(xml_text.size()), XML_TRUE);
    if (status != XML_STATUS_OK) {
        const long line = static_cast<long>(XML_GetCurrentLineNumber(parser));
        const long column = static_cast<long>(XML_GetCurrentColumnNumber(parser)) + 1;
        const std::string message = XML_ErrorString(XML_GetErrorCode(parser));
        XML_ParserFree(parser);
        throw ParseError("xml: " + message + " at line " + std::to_string(line) + ", column " +
                             std::to_string(column),
                         line, column);
    }
    XML_ParserFree(parser);
    return state.manifest;
}

TextureLoadResult load_textures(TextureManifest& manifest,
                                const std::filesystem::path& root_dir) {
    if (!std::filesystem::is_directory(root_dir)) {
        throw IoError("texture root does not exist: " + root_dir.string());
    }
    TextureLoadResult result;
    for (auto& entry : manifest.entries) {
        const std::filesystem::path path = root_dir / entry.texture_path;
        if (!std::filesystem::is_regular_file(path)) {
            result.missing.push_back(entry.texture_path);
            continue;
        }
        TextureImage image = read_image(path, entry.texture_path);
        entry.image_width = image.width;
        entry.image_height = image.height;
        result.images.push_back(std::move(image));
    }
    return result;
}

std::string manifest_to_json(const TextureManifest& manifest) {
    json entries = json::array();
    for (const auto& entry : manifest.entries) {
        json coords = json::array();
        for (const auto& [u, v] : entry.tex_coords) coords.push_back(json::array({u, v}));
        entries.push_back(json{{"texture_path", entry.texture_path},
                               {"surface_id", entry.surface_id},
                               {"tex_coords", coords},
                               {"image_width", entry.image_width},
                               {"image_height", entry.image_height}});
    }
    return entries.dump(2) + "\n";
}

TextureManifest manifest_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
    if (!doc.is_array()) {
        throw ParseError("manifest must be a JSON array of entries");
    }
    TextureManifest manifest;
    for (const auto& node : doc) {
        TextureManifestEntry entry;
        entry.texture_path = node.at("texture_path").get<std::string>();
        entry.surface_id = node.value("surface_id", "");
        for (const auto& pair : node.value("tex_coords", json::array())) {
            entry.tex_coords.emplace_back(pair[0].get<double>(), pair[1].get<double>());
        }
        entry.image_width = node.value("image_width", 0);
        entry.image_height = node.value("image_height", 0);
        if (entry.texture_path.empty()) {
            throw ParseError("manifest entry with empty texture_path");
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

}  // namespace facadewin
