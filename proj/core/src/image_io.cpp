#include "mtcd/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace mtcd {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_rows(const std::filesystem::path& path, int height, int width, int color_type,
                int bytes_per_pixel, const std::uint8_t* data) {
    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) throw IoError("cannot open for writing: " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed: " + path.string());
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * bytes_per_pixel;
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(data + stride * static_cast<std::size_t>(y)));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) throw IoError("write failed: " + path.string());
}

} // namespace

GrayImage read_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) throw LoadError("cannot open image: " + path.string());
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw LoadError("not a PNG file: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw LoadError("libpng initialisation failed: " + path.string());
    }
    GrayImage image;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw LoadError("corrupt PNG: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(width)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw LoadError("unsupported PNG layout: " + path.string());
    }
    image = GrayImage(height, width);
    for (int y = 0; y < height; ++y) png_read_row(png, image.data() + static_cast<std::size_t>(y) * width, nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
    write_rows(path, image.height(), image.width(), PNG_COLOR_TYPE_GRAY, 1, image.data());
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
    write_rows(path, image.height, image.width, PNG_COLOR_TYPE_RGB, 3, image.rgb.data());
}

BinaryMask threshold(const GrayImage& image, std::uint8_t level) {
    BinaryMask mask(image.height(), image.width());
    for (std::size_t i = 0; i < image.size(); ++i) mask.data()[i] = image.data()[i] >= level ? 1 : 0;
    return mask;
}

GrayImage mask_to_gray(const BinaryMask& mask) {
    GrayImage out(mask.height(), mask.width());
    for (std::size_t i = 0; i < mask.size(); ++i) out.data()[i] = mask.data()[i] ? 255 : 0;
    return out;
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    write_png(path, mask_to_gray(mask));
}

BinaryMask read_mask_png(const std::filesystem::path& path) { return threshold(read_png(path)); }

} // namespace mtcd
