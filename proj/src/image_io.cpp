#include "relight/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <vector>

#include "relight/errors.hpp"

namespace relight {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

// Silence libpng's default stderr chatter; errors still longjmp back.
void discard_warning(png_structp, png_const_charp) {}

ColorImage load_png(std::FILE* fp, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("load_image: out of memory decoding " + path);
    }
    png_set_error_fn(png, nullptr, nullptr, discard_warning);

    std::vector<png_byte> row;
    std::vector<double> samples[3];

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("load_image: corrupt PNG data in " + path);
    }

    png_init_io(png, fp);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int out_depth = png_get_bit_depth(png, info);
    const int channels = png_get_channels(png, info);
    if (channels != 3 || (out_depth != 8 && out_depth != 16)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("load_image: unexpected PNG layout in " + path);
    }

    row.resize(png_get_rowbytes(png, info));
    for (int c = 0; c < 3; ++c) {
        samples[c].resize(static_cast<std::size_t>(width) * height);
    }
    for (png_uint_32 r = 0; r < height; ++r) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 col = 0; col < width; ++col) {
            const std::size_t p = static_cast<std::size_t>(r) * width + col;
            for (int c = 0; c < 3; ++c) {
                if (out_depth == 8) {
                    samples[c][p] = row[3 * col + static_cast<std::size_t>(c)] / 255.0;
                } else {
                    const std::size_t base = 6 * col + 2 * static_cast<std::size_t>(c);
                    const unsigned v = (static_cast<unsigned>(row[base]) << 8) | row[base + 1];
                    samples[c][p] = v / 65535.0;
                }
            }
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);

    const int h = static_cast<int>(height);
    const int w = static_cast<int>(width);
    return ColorImage(ImagePlane(h, w, std::move(samples[0])),
                      ImagePlane(h, w, std::move(samples[1])),
                      ImagePlane(h, w, std::move(samples[2])));
}

// Reads one PPM header token, skipping whitespace and '#' comment lines.
bool next_ppm_token(std::FILE* fp, std::string& token) {
    token.clear();
    int ch = std::fgetc(fp);
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = std::fgetc(fp);
        } else if (std::isspace(ch)) {
            ch = std::fgetc(fp);
        } else {
            break;
        }
    }
    while (ch != EOF && !std::isspace(ch) && ch != '#') {
        token.push_back(static_cast<char>(ch));
        ch = std::fgetc(fp);
    }
    if (ch == '#') std::ungetc(ch, fp);
    return !token.empty();
}

long parse_ppm_int(std::FILE* fp, const std::string& path) {
    std::string token;
    if (!next_ppm_token(fp, token)) {
        throw FormatError("load_image: truncated PPM header in " + path);
    }
    long value = 0;
    for (char c : token) {
        if (c < '0' || c > '9') {
            throw FormatError("load_image: malformed PPM header in " + path);
        }
        value = value * 10 + (c - '0');
        if (value > 1000000) {
            throw FormatError("load_image: PPM header value out of range in " + path);
        }
    }
    return value;
}

ColorImage load_ppm(std::FILE* fp, const std::string& path) {
    // The two magic bytes were already consumed by the format sniffer.
    const long width = parse_ppm_int(fp, path);
    const long height = parse_ppm_int(fp, path);
    const long maxval = parse_ppm_int(fp, path);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
        throw FormatError("load_image: invalid PPM dimensions in " + path);
    }
    // Exactly one whitespace byte separates the header from the raster, and
    // parse_ppm_int already consumed it as the token terminator.

    const int bytes_per_sample = maxval < 256 ? 1 : 2;
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<unsigned char> raw(count * 3 * static_cast<std::size_t>(bytes_per_sample));
    if (std::fread(raw.data(), 1, raw.size(), fp) != raw.size()) {
        throw FormatError("load_image: truncated PPM raster in " + path);
    }

    std::vector<double> samples[3];
    for (int c = 0; c < 3; ++c) samples[c].resize(count);
    for (std::size_t p = 0; p < count; ++p) {
        for (int c = 0; c < 3; ++c) {
            const std::size_t base =
                (p * 3 + static_cast<std::size_t>(c)) * static_cast<std::size_t>(bytes_per_sample);
            unsigned v = raw[base];
            if (bytes_per_sample == 2) v = (v << 8) | raw[base + 1];
            samples[c][p] = static_cast<double>(v) / static_cast<double>(maxval);
        }
    }
    const int h = static_cast<int>(height);
    const int w = static_cast<int>(width);
    return ColorImage(ImagePlane(h, w, std::move(samples[0])),
                      ImagePlane(h, w, std::move(samples[1])),
                      ImagePlane(h, w, std::move(samples[2])));
}

} // namespace

ColorImage load_image(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) {
        throw IoError("load_image: cannot open " + path);
    }
    unsigned char magic[8] = {};
    const std::size_t got = std::fread(magic, 1, sizeof(magic), fp.get());
    if (got >= 2 && magic[0] == 'P' && magic[1] == '6') {
        // Rewind past the rest of the probe so the header parser sees the
        // bytes that follow the "P6" signature.
        std::fseek(fp.get(), 2, SEEK_SET);
        return load_ppm(fp.get(), path);
    }
    if (got == 8 && std::equal(std::begin(kPngMagic), std::end(kPngMagic), magic)) {
        std::fseek(fp.get(), 0, SEEK_SET);
        return load_png(fp.get(), path);
    }
    throw UnsupportedFormatError("load_image: " + path + " is neither PNG nor binary PPM");
}

void save_image(const ColorImage& img, const std::string& path) {
    const int h = img.height();
    const int w = img.width();
    std::vector<png_byte> raster(static_cast<std::size_t>(h) * w * 3);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t base = (static_cast<std::size_t>(r) * w + c) * 3;
            for (int ch = 0; ch < 3; ++ch) {
                const double v = std::clamp(img.channel(ch).at(r, c), 0.0, 1.0);
                raster[base + static_cast<std::size_t>(ch)] =
                    static_cast<png_byte>(std::floor(v * 255.0 + 0.5));
            }
        }
    }

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) {
        throw IoError("save_image: cannot open " + path + " for writing");
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_write_struct(&png, &info);
        throw IoError("save_image: out of memory encoding " + path);
    }
    png_set_error_fn(png, nullptr, nullptr, discard_warning);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("save_image: write failure on " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < h; ++r) {
        png_write_row(png, raster.data() + static_cast<std::size_t>(r) * w * 3);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace relight
