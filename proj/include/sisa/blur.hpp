#pragma once

#include <vector>

#include "sisa/image.hpp"
#include "sisa/mask.hpp"

namespace sisa
{

/**
 * Normalised 1-D Gaussian taps over [-radius, radius] with radius = ceil(3 sigma).
 * The 2-D kernel G(x, y) = exp(-(x^2 + y^2) / (2 sigma^2)) / (2 pi sigma^2) is the
 * outer product of these taps once normalised, which is what blur_region applies.
 */
struct GaussianKernel
{
    double sigma = 0.0;
    int radius = 0;
    std::vector<double> taps;

    double center() const { return taps[std::size_t(radius)]; }
};

GaussianKernel gaussian_kernel(double sigma);

/// Blurs the masked pixels of `img`, reading neighbours from the unmodified input with
/// clamp-to-edge borders. Unmasked pixels are left alone.
ImageBuffer blur_region(const ImageBuffer &img, const BoundingBox &bbox, const MaskRLE &mask, double sigma);

/// Same, but reads from `source` and writes into `target` (same shape). Lets several
/// regions blur against the original image.
void blur_region_into(const ImageBuffer &source, ImageBuffer &target, const BoundingBox &bbox,
                      const MaskRLE &mask, const GaussianKernel &kernel);

} // namespace sisa
