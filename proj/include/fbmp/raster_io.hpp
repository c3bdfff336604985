#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fbmp/image.hpp"

namespace fbmp {

// Native float raster container. Byte layout (all little-endian):
//   magic "FBMP" | version u16 | height u32 | width u32 | bands u16 | dtype u16
// followed by band-major, row-major 32-bit float samples. dtype 1 is the only
// defined code (float32). Round trips are bit-exact.
struct RasterHeader {
    static constexpr char kMagic[4] = {'F', 'B', 'M', 'P'};
    static constexpr std::uint16_t kVersion = 1;
    static constexpr std::uint16_t kDtypeF32 = 1;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint16_t band_count = 0;
};

void save_raster(const MultiBandImage& img, const std::string& path);
MultiBandImage load_raster(const std::string& path);

// Convenience for kernels (stored as a 1-band raster).
void save_kernel(const Kernel2D& k, const std::string& path);
Kernel2D load_kernel(const std::string& path);

// 8/16-bit grayscale or RGB PNG, mapped to [0,1] and multiplied by `scale`.
MultiBandImage import_png(const std::string& path, double scale = 1.0);

enum class PngMode {
    direct,    // clamp [0,1] to 8-bit
    residual,  // 2*value + 128/255, the residual-visualization convention
};

// Writes one band as grayscale or three selected bands as RGB.
void export_png(const MultiBandImage& img, const std::string& path,
                const std::vector<int>& band_selection, PngMode mode = PngMode::direct);

}  // namespace fbmp
