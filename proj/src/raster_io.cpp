#include "fbmp/raster_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <png.h>

namespace fbmp {

namespace {

void put_u16(std::ostream& os, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 4 + 2 + 2;

}  // namespace

void save_raster(const MultiBandImage& img, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(RasterHeader::kMagic, 4);
    put_u16(os, RasterHeader::kVersion);
    put_u32(os, static_cast<std::uint32_t>(img.height()));
    put_u32(os, static_cast<std::uint32_t>(img.width()));
    put_u16(os, static_cast<std::uint16_t>(img.band_count()));
    put_u16(os, RasterHeader::kDtypeF32);

    std::vector<unsigned char> buf;
    for (const Plane& b : img.bands()) {
        buf.resize(b.size() * 4);
        for (std::size_t i = 0; i < b.size(); ++i) {
            const float f = static_cast<float>(b.data()[i]);
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);  // host is little-endian
            for (int j = 0; j < 4; ++j)
                buf[i * 4 + j] = static_cast<unsigned char>((bits >> (8 * j)) & 0xff);
        }
        os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    if (!os) throw IoError("write failed: " + path);
}

MultiBandImage load_raster(const std::string& path) {
    std::ifstream is(path, std::ios::binary | std::ios::ate);
    if (!is) throw IoError("cannot open: " + path);
    const std::streamoff total = is.tellg();
    is.seekg(0);
    if (total < static_cast<std::streamoff>(kHeaderBytes))
        throw FormatError("raster too short for header: " + path);

    unsigned char hdr[kHeaderBytes];
    is.read(reinterpret_cast<char*>(hdr), kHeaderBytes);
    if (std::memcmp(hdr, RasterHeader::kMagic, 4) != 0)
        throw FormatError("bad magic (expected FBMP): " + path);
    const std::uint16_t version = get_u16(hdr + 4);
    if (version != RasterHeader::kVersion)
        throw FormatError("unsupported raster version " + std::to_string(version) + ": " + path);
    const std::uint32_t h = get_u32(hdr + 6);
    const std::uint32_t w = get_u32(hdr + 10);
    const std::uint16_t nb = get_u16(hdr + 14);
    const std::uint16_t dtype = get_u16(hdr + 16);
    if (dtype != RasterHeader::kDtypeF32)
        throw FormatError("unsupported dtype code " + std::to_string(dtype) + ": " + path);
    if (h == 0 || w == 0 || nb == 0) throw FormatError("empty raster dimensions: " + path);

    const std::size_t payload = static_cast<std::size_t>(h) * w * nb * 4;
    if (static_cast<std::size_t>(total) != kHeaderBytes + payload)
        throw FormatError("payload length mismatch (expected " + std::to_string(payload) +
                          " bytes): " + path);

    std::vector<Plane> bands;
    bands.reserve(nb);
    std::vector<unsigned char> buf(static_cast<std::size_t>(h) * w * 4);
    for (int b = 0; b < nb; ++b) {
        is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!is) throw FormatError("truncated payload: " + path);
        Plane p(static_cast<int>(h), static_cast<int>(w));
        for (std::size_t i = 0; i < p.size(); ++i) {
            std::uint32_t bits = get_u32(buf.data() + i * 4);
            float f;
            std::memcpy(&f, &bits, 4);
            p.data()[i] = f;
        }
        bands.push_back(std::move(p));
    }
    return MultiBandImage(std::move(bands));
}

void save_kernel(const Kernel2D& k, const std::string& path) {
    save_raster(MultiBandImage({k.taps()}), path);
}

Kernel2D load_kernel(const std::string& path) {
    MultiBandImage img = load_raster(path);
    if (img.band_count() != 1 || img.height() != img.width() || img.height() % 2 == 0)
        throw FormatError("kernel raster must be one odd square band: " + path);
    const Plane& t = img.band(0);
    return Kernel2D(img.height(), std::vector<double>(t.data(), t.data() + t.size()));
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

MultiBandImage import_png(const std::string& path, double scale) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png: allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png: allocation failed");
    }
    std::vector<std::vector<unsigned char>> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("png: failed to decode " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    if ((depth != 8 && depth != 16) ||
        (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("png: only 8/16-bit grayscale or RGB is supported: " + path);
    }
    const int channels = color == PNG_COLOR_TYPE_RGB ? 3 : 1;
    const std::size_t stride = static_cast<std::size_t>(w) * channels * (depth / 8);

    rows.assign(h, std::vector<unsigned char>(stride));
    std::vector<png_bytep> row_ptrs(h);
    for (png_uint_32 r = 0; r < h; ++r) row_ptrs[r] = rows[r].data();
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const double denom = depth == 8 ? 255.0 : 65535.0;
    std::vector<Plane> bands(channels, Plane(static_cast<int>(h), static_cast<int>(w)));
    for (png_uint_32 r = 0; r < h; ++r) {
        const unsigned char* src = rows[r].data();
        for (png_uint_32 c = 0; c < w; ++c) {
            for (int ch = 0; ch < channels; ++ch) {
                double v;
                if (depth == 8) {
                    v = src[c * channels + ch];
                } else {  // PNG stores 16-bit samples big-endian
                    const std::size_t o = (static_cast<std::size_t>(c) * channels + ch) * 2;
                    v = (src[o] << 8) | src[o + 1];
                }
                bands[ch](static_cast<int>(r), static_cast<int>(c)) = v / denom * scale;
            }
        }
    }
    return MultiBandImage(std::move(bands));
}

void export_png(const MultiBandImage& img, const std::string& path,
                const std::vector<int>& band_selection, PngMode mode) {
    if (band_selection.size() != 1 && band_selection.size() != 3)
        throw ParamError("export_png: select one band (grayscale) or three (RGB)");
    for (int b : band_selection)
        if (b < 0 || b >= img.band_count())
            throw ParamError("export_png: band index out of range");

    const int channels = static_cast<int>(band_selection.size());
    const int h = img.height(), w = img.width();
    auto to_byte = [mode](double v) -> unsigned char {
        double scaled = mode == PngMode::direct ? v * 255.0 : 2.0 * v * 255.0 + 128.0;
        return static_cast<unsigned char>(std::clamp(std::lround(scaled), 0l, 255l));
    };

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png: allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png: allocation failed");
    }
    std::vector<std::vector<unsigned char>> rows(h, std::vector<unsigned char>(
                                                        static_cast<std::size_t>(w) * channels));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png: failed to encode " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, w, h, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c)
            for (int ch = 0; ch < channels; ++ch)
                rows[r][static_cast<std::size_t>(c) * channels + ch] =
                    to_byte(img.band(band_selection[ch])(r, c));
        png_write_row(png, rows[r].data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace fbmp
