#ifndef UATTA_IMAGE_IO_HPP
#define UATTA_IMAGE_IO_HPP

#include <filesystem>

#include "uatta/augment.hpp"

namespace uatta {

// PNG or binary PPM (P6, maxval 255), detected from the file signature.
RasterImage read_image(const std::filesystem::path& path);

// 8-bit RGB; channel values are rounded to the nearest of 256 levels.
void write_png(const RasterImage& img, const std::filesystem::path& path);
void write_ppm(const RasterImage& img, const std::filesystem::path& path);

// Format from the extension: .ppm writes P6, anything else PNG.
void write_image(const RasterImage& img, const std::filesystem::path& path);

}  // namespace uatta

#endif  // UATTA_IMAGE_IO_HPP
