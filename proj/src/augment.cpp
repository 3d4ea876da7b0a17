#include "uatta/augment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "uatta/core.hpp"
#include "uatta/random.hpp"

namespace uatta {

namespace {

float clamp01(double v)
{
    return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

double hue_to_rgb(double p, double q, double t)
{
    if (t < 0.0) t += 1.0;
    if (t > 1.0) t -= 1.0;
    if (t < 1.0 / 6.0) return p + (q - p) * 6.0 * t;
    if (t < 0.5) return q;
    if (t < 2.0 / 3.0) return p + (q - p) * (2.0 / 3.0 - t) * 6.0;
    return p;
}

}  // namespace

RasterImage::RasterImage(int w, int h, float fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill)
{
    if (w < 1 || h < 1) {
        throw Error(fmt::format("image dimensions {}x{} must be positive", w, h));
    }
}

AugmentationPlan identity_plan(std::uint64_t seed, const std::string& sample_id, int width, int height)
{
    AugmentationPlan plan;
    plan.seed = seed;
    plan.sample_id = sample_id;
    plan.crop = CropRect{0, 0, width, height};
    return plan;
}

AugmentationPlan sample_plan(std::uint64_t seed, const std::string& sample_id, int replicate_id, int width, int height,
                             CropScale crop_scale)
{
    if (replicate_id < 0) {
        throw Error(fmt::format("replicate_id {} must be >= 0", replicate_id));
    }
    if (!(crop_scale.lo > 0.0 && crop_scale.lo <= crop_scale.hi && crop_scale.hi <= 1.0)) {
        throw Error(fmt::format("crop scale range [{}, {}] must lie in (0, 1]", crop_scale.lo, crop_scale.hi));
    }
    AugmentationPlan plan = identity_plan(seed, sample_id, width, height);
    plan.replicate_id = replicate_id;
    if (replicate_id == 0) {
        return plan;
    }

    KeyedStream rng(seed, sample_id, static_cast<std::uint64_t>(replicate_id));
    using R = JitterRanges;
    plan.brightness = rng.uniform_open(R::brightness_lo, R::brightness_hi);
    plan.saturation = rng.uniform_open(R::saturation_lo, R::saturation_hi);
    plan.hue = rng.uniform_open(R::hue_lo, R::hue_hi);
    plan.contrast = rng.uniform_open(R::contrast_lo, R::contrast_hi);

    auto side = [&](int full) {
        const double scale = crop_scale.lo + (crop_scale.hi - crop_scale.lo) * rng.uniform01();
        return std::clamp(static_cast<int>(std::lround(scale * full)), 1, full);
    };
    plan.crop.w = side(width);
    plan.crop.h = side(height);
    plan.crop.x = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(width - plan.crop.w) + 1));
    plan.crop.y = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(height - plan.crop.h) + 1));
    plan.hflip = rng.bernoulli(0.5);
    plan.vflip = rng.bernoulli(0.5);
    return plan;
}

RasterImage adjust_brightness(const RasterImage& img, double delta)
{
    RasterImage out = img;
    for (float& v : out.pixels) {
        v = clamp01(static_cast<double>(v) + delta);
    }
    return out;
}

RasterImage adjust_contrast(const RasterImage& img, double factor)
{
    RasterImage out = img;
    for (float& v : out.pixels) {
        v = clamp01((static_cast<double>(v) - 0.5) * factor + 0.5);
    }
    return out;
}

void rgb_to_hsl(double r, double g, double b, double& h, double& s, double& l)
{
    const double hi = std::max({r, g, b});
    const double lo = std::min({r, g, b});
    l = 0.5 * (hi + lo);
    if (hi == lo) {
        h = 0.0;
        s = 0.0;
        return;
    }
    const double d = hi - lo;
    s = l > 0.5 ? d / (2.0 - hi - lo) : d / (hi + lo);
    if (hi == r) {
        h = (g - b) / d + (g < b ? 6.0 : 0.0);
    } else if (hi == g) {
        h = (b - r) / d + 2.0;
    } else {
        h = (r - g) / d + 4.0;
    }
    h /= 6.0;
}

void hsl_to_rgb(double h, double s, double l, double& r, double& g, double& b)
{
    if (s == 0.0) {
        r = g = b = l;
        return;
    }
    const double q = l < 0.5 ? l * (1.0 + s) : l + s - l * s;
    const double p = 2.0 * l - q;
    r = hue_to_rgb(p, q, h + 1.0 / 3.0);
    g = hue_to_rgb(p, q, h);
    b = hue_to_rgb(p, q, h - 1.0 / 3.0);
}

RasterImage adjust_saturation_hue(const RasterImage& img, double saturation, double hue)
{
    RasterImage out = img;
    for (std::size_t i = 0; i < out.pixels.size(); i += 3) {
        double h = 0.0, s = 0.0, l = 0.0;
        rgb_to_hsl(out.pixels[i], out.pixels[i + 1], out.pixels[i + 2], h, s, l);
        s = std::clamp(s * saturation, 0.0, 1.0);
        h = h + hue;
        h -= std::floor(h);
        double r = 0.0, g = 0.0, b = 0.0;
        hsl_to_rgb(h, s, l, r, g, b);
        out.pixels[i] = clamp01(r);
        out.pixels[i + 1] = clamp01(g);
        out.pixels[i + 2] = clamp01(b);
    }
    return out;
}

RasterImage crop(const RasterImage& img, const CropRect& rect)
{
    if (rect.w < 1 || rect.h < 1 || rect.x < 0 || rect.y < 0 || rect.x + rect.w > img.width ||
        rect.y + rect.h > img.height) {
        throw Error(fmt::format("crop {}x{}+{}+{} outside {}x{} image", rect.w, rect.h, rect.x, rect.y, img.width,
                                img.height));
    }
    RasterImage out(rect.w, rect.h);
    for (int y = 0; y < rect.h; ++y) {
        const auto src = img.pixels.begin() + static_cast<std::ptrdiff_t>(img.index(rect.x, rect.y + y, 0));
        std::copy(src, src + static_cast<std::ptrdiff_t>(rect.w) * 3,
                  out.pixels.begin() + static_cast<std::ptrdiff_t>(out.index(0, y, 0)));
    }
    return out;
}

RasterImage resize_bilinear(const RasterImage& img, int width, int height)
{
    RasterImage out(width, height);
    if (width == img.width && height == img.height) {
        out.pixels = img.pixels;
        return out;
    }
    const double sx = static_cast<double>(img.width) / width;
    const double sy = static_cast<double>(img.height) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double ty = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double tx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = (1.0 - tx) * img.at(x0, y0, c) + tx * img.at(x1, y0, c);
                const double bottom = (1.0 - tx) * img.at(x0, y1, c) + tx * img.at(x1, y1, c);
                out.at(x, y, c) = clamp01((1.0 - ty) * top + ty * bottom);
            }
        }
    }
    return out;
}

RasterImage flip_horizontal(const RasterImage& img)
{
    RasterImage out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
            }
        }
    }
    return out;
}

RasterImage flip_vertical(const RasterImage& img)
{
    RasterImage out = img;
    for (int y = 0; y < img.height; ++y) {
        const auto src = img.pixels.begin() + static_cast<std::ptrdiff_t>(img.index(0, img.height - 1 - y, 0));
        std::copy(src, src + static_cast<std::ptrdiff_t>(img.width) * 3,
                  out.pixels.begin() + static_cast<std::ptrdiff_t>(out.index(0, y, 0)));
    }
    return out;
}

RasterImage apply_plan(const RasterImage& img, const AugmentationPlan& plan)
{
    RasterImage out = img;
    // Operators at their identity value are skipped so the identity plan is pixel-exact.
    if (plan.brightness != 0.0) {
        out = adjust_brightness(out, plan.brightness);
    }
    if (plan.contrast != 1.0) {
        out = adjust_contrast(out, plan.contrast);
    }
    if (plan.saturation != 1.0 || plan.hue != 0.0) {
        out = adjust_saturation_hue(out, plan.saturation, plan.hue);
    }
    if (plan.crop != CropRect{0, 0, img.width, img.height}) {
        out = resize_bilinear(crop(out, plan.crop), img.width, img.height);
    }
    if (plan.hflip) {
        out = flip_horizontal(out);
    }
    if (plan.vflip) {
        out = flip_vertical(out);
    }
    return out;
}

RasterImage remove_black_background(const RasterImage& img, double threshold)
{
    if (!(threshold >= 0.0 && threshold < 1.0)) {
        throw Error(fmt::format("black-background threshold {} outside [0, 1)", threshold));
    }
    int x_lo = img.width, x_hi = -1, y_lo = img.height, y_hi = -1;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const float v = std::max({img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)});
            if (v > threshold) {
                x_lo = std::min(x_lo, x);
                x_hi = std::max(x_hi, x);
                y_lo = std::min(y_lo, y);
                y_hi = std::max(y_hi, y);
            }
        }
    }
    if (x_hi < 0) {
        return img;
    }
    return crop(img, CropRect{x_lo, y_lo, x_hi - x_lo + 1, y_hi - y_lo + 1});
}

RasterImage resize_normalize(const RasterImage& img, int side)
{
    if (side < 1) {
        throw Error(fmt::format("resize side {} must be >= 1", side));
    }
    RasterImage out = resize_bilinear(img, side, side);
    const auto count = static_cast<double>(side) * side;
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0;
        for (std::size_t i = c; i < out.pixels.size(); i += 3) {
            mean += out.pixels[i];
        }
        mean /= count;
        double var = 0.0;
        for (std::size_t i = c; i < out.pixels.size(); i += 3) {
            var += (out.pixels[i] - mean) * (out.pixels[i] - mean);
        }
        const double sd = std::sqrt(var / count);
        for (std::size_t i = c; i < out.pixels.size(); i += 3) {
            const double z = sd > 0.0 ? (out.pixels[i] - mean) / sd : 0.0;
            out.pixels[i] = clamp01(0.5 + 0.25 * z);
        }
    }
    return out;
}

}  // namespace uatta
