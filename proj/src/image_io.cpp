#include "uatta/image_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <png.h>

#include "uatta/core.hpp"

namespace uatta {

namespace {

std::vector<std::uint8_t> to_bytes(const RasterImage& img)
{
    std::vector<std::uint8_t> bytes(img.pixels.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const double v = std::clamp(static_cast<double>(img.pixels[i]), 0.0, 1.0);
        bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    return bytes;
}

RasterImage from_bytes(int width, int height, const std::uint8_t* bytes)
{
    RasterImage img(width, height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        img.pixels[i] = static_cast<float>(bytes[i] / 255.0);
    }
    return img;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(fmt::format("cannot open image '{}'", path.string()));
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RasterImage decode_png(const std::vector<std::uint8_t>& data, const std::filesystem::path& path)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, data.data(), data.size())) {
        throw Error(fmt::format("'{}': {}", path.string(), image.message));
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        const std::string why = image.message;
        png_image_free(&image);
        throw Error(fmt::format("'{}': {}", path.string(), why));
    }
    return from_bytes(static_cast<int>(image.width), static_cast<int>(image.height), buffer.data());
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(const std::vector<std::uint8_t>& data, std::size_t& pos)
{
    for (;;) {
        while (pos < data.size() && std::isspace(data[pos])) {
            ++pos;
        }
        if (pos < data.size() && data[pos] == '#') {
            while (pos < data.size() && data[pos] != '\n') {
                ++pos;
            }
            continue;
        }
        break;
    }
    std::string tok;
    while (pos < data.size() && !std::isspace(data[pos])) {
        tok.push_back(static_cast<char>(data[pos++]));
    }
    return tok;
}

RasterImage decode_ppm(const std::vector<std::uint8_t>& data, const std::filesystem::path& path)
{
    std::size_t pos = 0;
    const auto fail = [&](const std::string& why) {
        return Error(fmt::format("'{}': {}", path.string(), why));
    };
    if (ppm_token(data, pos) != "P6") {
        throw fail("not a binary PPM");
    }
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(ppm_token(data, pos));
        height = std::stoi(ppm_token(data, pos));
        maxval = std::stoi(ppm_token(data, pos));
    } catch (const std::exception&) {
        throw fail("malformed PPM header");
    }
    if (maxval != 255 || width < 1 || height < 1) {
        throw fail("only 8-bit PPM with positive dimensions is supported");
    }
    ++pos;  // single whitespace byte before the raster
    const std::size_t need = static_cast<std::size_t>(width) * height * 3;
    if (data.size() < pos + need) {
        throw fail("truncated PPM raster");
    }
    return from_bytes(width, height, data.data() + pos);
}

}  // namespace

RasterImage read_image(const std::filesystem::path& path)
{
    const auto data = slurp(path);
    static constexpr std::uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (data.size() >= 8 && std::equal(std::begin(png_sig), std::end(png_sig), data.begin())) {
        return decode_png(data, path);
    }
    if (data.size() >= 2 && data[0] == 'P' && data[1] == '6') {
        return decode_ppm(data, path);
    }
    throw Error(fmt::format("'{}': unrecognized image format (expected PNG or P6 PPM)", path.string()));
}

void write_png(const RasterImage& img, const std::filesystem::path& path)
{
    const auto bytes = to_bytes(img);
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
        throw Error(fmt::format("cannot write '{}': {}", path.string(), image.message));
    }
}

void write_ppm(const RasterImage& img, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(fmt::format("cannot write '{}'", path.string()));
    }
    const auto bytes = to_bytes(img);
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(fmt::format("cannot write '{}'", path.string()));
    }
}

void write_image(const RasterImage& img, const std::filesystem::path& path)
{
    if (path.extension() == ".ppm") {
        write_ppm(img, path);
    } else {
        write_png(img, path);
    }
}

}  // namespace uatta
