#include "vtsize/png_io.hpp"

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include <png.h>

namespace vtsize {

namespace {

[[noreturn]] void on_png_error(png_structp png, png_const_charp msg) {
    (void)png;
    throw InvalidInput(std::string("png: ") + msg);
}

void on_png_warning(png_structp, png_const_charp) {}

struct MemoryReader {
    const unsigned char* data;
    size_t size;
    size_t pos = 0;
};

void mem_read(png_structp png, png_bytep out, png_size_t count) {
    auto* r = static_cast<MemoryReader*>(png_get_io_ptr(png));
    if (r->pos + count > r->size) png_error(png, "truncated stream");
    std::memcpy(out, r->data + r->pos, count);
    r->pos += count;
}

void mem_write(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), count);
}

void mem_flush(png_structp) {}

struct Decoded {
    int width = 0, height = 0;
    int channels = 0; // 1 = gray/indexed, 3 = rgb
    std::vector<unsigned char> pixels;
};

// Decode to 8-bit samples. `keep_palette` reads palette indices verbatim
// instead of expanding to RGB.
Decoded decode(png_structp png, png_infop info, bool keep_palette) {
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        if (keep_palette) {
            if (bit_depth < 8) png_set_packing(png);
        } else {
            png_set_palette_to_rgb(png);
        }
    }
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS) && !(keep_palette && color_type == PNG_COLOR_TYPE_PALETTE))
        png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    Decoded out;
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    const size_t rowbytes = png_get_rowbytes(png, info);
    out.pixels.resize(rowbytes * static_cast<size_t>(out.height));
    std::vector<png_bytep> rows(static_cast<size_t>(out.height));
    for (int y = 0; y < out.height; ++y) rows[static_cast<size_t>(y)] = out.pixels.data() + rowbytes * static_cast<size_t>(y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    return out;
}

struct PngReadHandle {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngReadHandle() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
        if (!png) throw InvalidInput("png: failed to create read struct");
        info = png_create_info_struct(png);
        if (!info) {
            png_destroy_read_struct(&png, nullptr, nullptr);
            throw InvalidInput("png: failed to create info struct");
        }
    }
    ~PngReadHandle() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriteHandle {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngWriteHandle() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
        if (!png) throw InvalidInput("png: failed to create write struct");
        info = png_create_info_struct(png);
        if (!info) {
            png_destroy_write_struct(&png, nullptr);
            throw InvalidInput("png: failed to create info struct");
        }
    }
    ~PngWriteHandle() { png_destroy_write_struct(&png, &info); }
};

struct FileHandle {
    std::FILE* fp = nullptr;
    explicit FileHandle(const std::string& path, const char* mode) : fp(std::fopen(path.c_str(), mode)) {
        if (!fp) throw InvalidInput("png: cannot open " + path);
    }
    ~FileHandle() {
        if (fp) std::fclose(fp);
    }
};

Decoded decode_file(const std::string& path, bool keep_palette) {
    FileHandle file(path, "rb");
    PngReadHandle h;
    try {
        png_init_io(h.png, file.fp);
        return decode(h.png, h.info, keep_palette);
    } catch (const InvalidInput& e) {
        throw InvalidInput(std::string(e.what()) + " [" + path + "]");
    }
}

Decoded decode_memory(std::string_view bytes, bool keep_palette) {
    MemoryReader reader{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()};
    PngReadHandle h;
    png_set_read_fn(h.png, &reader, mem_read);
    return decode(h.png, h.info, keep_palette);
}

void encode(png_structp png, png_infop info, int width, int height, int color_type,
            const unsigned char* pixels) {
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const size_t rowbytes = static_cast<size_t>(width) * (color_type == PNG_COLOR_TYPE_RGB ? 3 : 1);
    std::vector<png_bytep> rows(static_cast<size_t>(height));
    for (int y = 0; y < height; ++y)
        rows[static_cast<size_t>(y)] = const_cast<png_bytep>(pixels + rowbytes * static_cast<size_t>(y));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
}

void encode_file(const std::string& path, int width, int height, int color_type,
                 const unsigned char* pixels) {
    if (width <= 0 || height <= 0) throw InvalidInput("png: refusing to write empty image " + path);
    FileHandle file(path, "wb");
    PngWriteHandle h;
    png_init_io(h.png, file.fp);
    encode(h.png, h.info, width, height, color_type, pixels);
}

std::string encode_memory(int width, int height, int color_type, const unsigned char* pixels) {
    if (width <= 0 || height <= 0) throw InvalidInput("png: refusing to encode empty image");
    std::string out;
    PngWriteHandle h;
    png_set_write_fn(h.png, &out, mem_write, mem_flush);
    encode(h.png, h.info, width, height, color_type, pixels);
    return out;
}

BinaryMask mask_from(const Decoded& d) {
    if (d.channels != 1 && d.channels != 3)
        throw InvalidInput("png: unsupported channel count for a mask");
    BinaryMask mask(d.width, d.height);
    const size_t n = mask.data.size();
    for (size_t i = 0; i < n; ++i) {
        const unsigned char v = d.channels == 1 ? d.pixels[i] : d.pixels[i * 3];
        mask.data[i] = v != 0 ? 1 : 0;
    }
    return mask;
}

RgbImage rgb_from(const Decoded& d) {
    RgbImage img(d.width, d.height);
    const size_t n = static_cast<size_t>(d.width) * d.height;
    for (size_t i = 0; i < n; ++i) {
        if (d.channels == 3) {
            img.data[i * 3 + 0] = d.pixels[i * 3 + 0] / 255.0f;
            img.data[i * 3 + 1] = d.pixels[i * 3 + 1] / 255.0f;
            img.data[i * 3 + 2] = d.pixels[i * 3 + 2] / 255.0f;
        } else {
            const float v = d.pixels[i] / 255.0f;
            img.data[i * 3 + 0] = img.data[i * 3 + 1] = img.data[i * 3 + 2] = v;
        }
    }
    return img;
}

std::vector<unsigned char> mask_bytes(const BinaryMask& mask) {
    std::vector<unsigned char> bytes(mask.data.size());
    for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.data[i] ? 255 : 0;
    return bytes;
}

std::vector<unsigned char> rgb_bytes(const RgbImage& img) {
    std::vector<unsigned char> bytes(img.data.size());
    for (size_t i = 0; i < bytes.size(); ++i) {
        const float v = std::min(1.0f, std::max(0.0f, img.data[i]));
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    return bytes;
}

} // namespace

BinaryMask read_mask_png(const std::string& path) { return mask_from(decode_file(path, false)); }

void write_mask_png(const BinaryMask& mask, const std::string& path) {
    encode_file(path, mask.width, mask.height, PNG_COLOR_TYPE_GRAY, mask_bytes(mask).data());
}

RgbImage read_rgb_png(const std::string& path) { return rgb_from(decode_file(path, false)); }

void write_rgb_png(const RgbImage& img, const std::string& path) {
    encode_file(path, img.width, img.height, PNG_COLOR_TYPE_RGB, rgb_bytes(img).data());
}

GrayImage read_gray_png(const std::string& path) {
    const Decoded d = decode_file(path, false);
    GrayImage img(d.width, d.height);
    const size_t n = img.data.size();
    for (size_t i = 0; i < n; ++i) {
        const unsigned char v = d.channels == 1 ? d.pixels[i] : d.pixels[i * 3];
        img.data[i] = d.channels == 1 ? v / 255.0f
                                      : (0.299f * d.pixels[i * 3] + 0.587f * d.pixels[i * 3 + 1] +
                                         0.114f * d.pixels[i * 3 + 2]) /
                                            255.0f;
    }
    return img;
}

void write_gray_png(const GrayImage& img, const std::string& path) {
    std::vector<unsigned char> bytes(img.data.size());
    for (size_t i = 0; i < bytes.size(); ++i) {
        const float v = std::min(1.0f, std::max(0.0f, img.data[i]));
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    encode_file(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, bytes.data());
}

LabelMap read_label_png(const std::string& path) {
    const Decoded d = decode_file(path, true);
    if (d.channels != 1)
        throw InvalidInput("png: label map must be paletted or grayscale [" + path + "]");
    LabelMap out(d.width, d.height);
    std::copy(d.pixels.begin(), d.pixels.end(), out.labels.begin());
    return out;
}

void write_label_png(const LabelMap& labels, const std::string& path) {
    encode_file(path, labels.width, labels.height, PNG_COLOR_TYPE_GRAY, labels.labels.data());
}

std::string encode_mask_png(const BinaryMask& mask) {
    return encode_memory(mask.width, mask.height, PNG_COLOR_TYPE_GRAY, mask_bytes(mask).data());
}

BinaryMask decode_mask_png(std::string_view bytes) { return mask_from(decode_memory(bytes, false)); }

std::string encode_rgb_png(const RgbImage& img) {
    return encode_memory(img.width, img.height, PNG_COLOR_TYPE_RGB, rgb_bytes(img).data());
}

RgbImage decode_rgb_png(std::string_view bytes) { return rgb_from(decode_memory(bytes, false)); }

} // namespace vtsize
