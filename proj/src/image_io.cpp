#include <cstddef>
#include <cstdio>

#include <jpeglib.h>
#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <memory>

#include "facadewin/errors.hpp"
#include "facadewin/image.hpp"

namespace facadewin {

TextureImage TextureImage::filled(std::string id, int width, int height,
                                  std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (width < 1 || height < 1) {
        throw Error("image: dimensions must be positive");
    }
    TextureImage img;
    img.id = std::move(id);
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = r;
        img.pixels[i + 1] = g;
        img.pixels[i + 2] = b;
    }
    return img;
}

void TextureImage::validate() const {
    if (width < 1 || height < 1) {
        throw Error("image '" + id + "': dimensions must be positive");
    }
    if (pixels.size() != static_cast<std::size_t>(width) * height * 3) {
        throw Error("image '" + id + "': pixel buffer does not match extent");
    }
}

std::uint8_t luma601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return static_cast<std::uint8_t>(std::lround(y));
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

TextureImage read_png_file(std::FILE* fp, const std::filesystem::path& path,
                           const std::string& id) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png: allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png: allocation failed");
    }
    std::vector<std::uint8_t> buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("png: failed to decode " + path.string());
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    buffer.resize(static_cast<std::size_t>(width) * height * 3);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) {
        rows[y] = buffer.data() + static_cast<std::size_t>(y) * width * 3;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    TextureImage img;
    img.id = id.empty() ? path.stem().string() : id;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.source = path.string();
    img.pixels = std::move(buffer);
    return img;
}

struct JpegErrorState {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX] = {0};
};

void jpeg_error_trampoline(j_common_ptr info) {
    auto* state = reinterpret_cast<JpegErrorState*>(info->err);
    (*info->err->format_message)(info, state->message);
    std::longjmp(state->jump, 1);
}

TextureImage read_jpeg_file(std::FILE* fp, const std::filesystem::path& path,
                            const std::string& id) {
    jpeg_decompress_struct cinfo{};
    JpegErrorState err{};
    std::vector<std::uint8_t> buffer;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_trampoline;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw ParseError("jpeg: " + std::string(err.message) + " (" + path.string() + ")");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    const int width = static_cast<int>(cinfo.output_width);
    const int height = static_cast<int>(cinfo.output_height);
    buffer.resize(static_cast<std::size_t>(width) * height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = buffer.data() +
                       static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);

    TextureImage img;
    img.id = id.empty() ? path.stem().string() : id;
    img.width = width;
    img.height = height;
    img.source = path.string();
    img.pixels = std::move(buffer);
    return img;
}

}  // namespace

TextureImage read_image(const std::filesystem::path& path, const std::string& id) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw IoError("cannot open image file: " + path.string());
    unsigned char magic[4] = {0};
    const std::size_t got = std::fread(magic, 1, sizeof(magic), fp.get());
    std::rewind(fp.get());
    if (got >= 4 && magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G') {
        return read_png_file(fp.get(), path, id);
    }
    if (got >= 2 && magic[0] == 0xFF && magic[1] == 0xD8) {
        return read_jpeg_file(fp.get(), path, id);
    }
    throw ParseError("unsupported image format: " + path.string());
}

void write_png(const TextureImage& image, const std::filesystem::path& path) {
    image.validate();
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoError("cannot open for writing: " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png: allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png: allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png: failed to write " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(image.at(0, y)));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace facadewin
