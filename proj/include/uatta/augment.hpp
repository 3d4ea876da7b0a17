#ifndef UATTA_AUGMENT_HPP
#define UATTA_AUGMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace uatta {

// Row-major RGB raster, channels in [0, 1].
struct RasterImage {
    int width{0};
    int height{0};
    std::vector<float> pixels;  // width * height * 3

    RasterImage() = default;
    RasterImage(int w, int h, float fill = 0.0F);

    [[nodiscard]] float at(int x, int y, int channel) const { return pixels[index(x, y, channel)]; }
    float& at(int x, int y, int channel) { return pixels[index(x, y, channel)]; }
    [[nodiscard]] std::size_t index(int x, int y, int channel) const
    {
        return (static_cast<std::size_t>(y) * width + x) * 3 + channel;
    }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

// Open parameter intervals for test-time colour jitter.
struct JitterRanges {
    static constexpr double brightness_lo = -0.15, brightness_hi = 0.15;
    static constexpr double saturation_lo = 0.5, saturation_hi = 2.5;
    static constexpr double hue_lo = -0.15, hue_hi = 0.15;
    static constexpr double contrast_lo = 0.5, contrast_hi = 1.5;
};

struct CropRect {
    int x{0};
    int y{0};
    int w{1};
    int h{1};

    friend bool operator==(const CropRect&, const CropRect&) = default;
};

struct AugmentationPlan {
    std::uint64_t seed{0};
    std::string sample_id;
    int replicate_id{0};
    double brightness{0.0};  // additive
    double saturation{1.0};  // HSL saturation factor
    double hue{0.0};         // fraction of a full turn
    double contrast{1.0};    // scale about 0.5
    CropRect crop;
    bool hflip{false};
    bool vflip{false};

    friend bool operator==(const AugmentationPlan&, const AugmentationPlan&) = default;
};

struct CropScale {
    double lo{0.7};
    double hi{1.0};
};

// Plan that leaves a width x height image unchanged.
AugmentationPlan identity_plan(std::uint64_t seed, const std::string& sample_id, int width, int height);

// Replicate 0 is always the identity; other replicates draw from a stream keyed
// by (seed, sample_id, replicate_id).
AugmentationPlan sample_plan(std::uint64_t seed, const std::string& sample_id, int replicate_id, int width, int height,
                             CropScale crop_scale = {});

// Colour jitter -> crop -> bilinear resize to the input size -> hflip -> vflip.
RasterImage apply_plan(const RasterImage& img, const AugmentationPlan& plan);

RasterImage adjust_brightness(const RasterImage& img, double delta);
RasterImage adjust_contrast(const RasterImage& img, double factor);
RasterImage adjust_saturation_hue(const RasterImage& img, double saturation, double hue);
RasterImage crop(const RasterImage& img, const CropRect& rect);
// Half-pixel-centre bilinear sampling.
RasterImage resize_bilinear(const RasterImage& img, int width, int height);
RasterImage flip_horizontal(const RasterImage& img);
RasterImage flip_vertical(const RasterImage& img);

inline constexpr double kDefaultBlackThreshold = 10.0 / 255.0;

// Crops to the bounding box of pixels whose brightest channel exceeds threshold.
RasterImage remove_black_background(const RasterImage& img, double threshold = kDefaultBlackThreshold);

// Resize to side x side, standardize each channel, store as 0.5 + z / 4 clamped to [0, 1].
RasterImage resize_normalize(const RasterImage& img, int side);

void rgb_to_hsl(double r, double g, double b, double& h, double& s, double& l);
void hsl_to_rgb(double h, double s, double l, double& r, double& g, double& b);

}  // namespace uatta

#endif  // UATTA_AUGMENT_HPP
