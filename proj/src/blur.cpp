#include "sisa/blur.hpp"

#include <algorithm>
#include <cmath>

#include "sisa/error.hpp"

namespace sisa
{

GaussianKernel gaussian_kernel(double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw Error(ErrorKind::Validation, "gaussian sigma must be positive");

    GaussianKernel kernel;
    kernel.sigma = sigma;
    kernel.radius = int(std::ceil(3.0 * sigma));
    kernel.taps.resize(std::size_t(2 * kernel.radius + 1));
    double sum = 0.0;
    for (int x = -kernel.radius; x <= kernel.radius; ++x)
    {
        const double t = std::exp(-double(x) * x / (2.0 * sigma * sigma));
        kernel.taps[std::size_t(x + kernel.radius)] = t;
        sum += t;
    }
    for (auto &t : kernel.taps)
        t /= sum;
    return kernel;
}

void blur_region_into(const ImageBuffer &source, ImageBuffer &target, const BoundingBox &bbox,
                      const MaskRLE &mask, const GaussianKernel &kernel)
{
    if (source.width() != target.width() || source.height() != target.height() ||
        source.channels() != target.channels())
        throw Error(ErrorKind::Validation, "blur source and target differ in shape");
    validate_box(bbox, source.width(), source.height());
    const BitMask cells = rle_decode(mask, bbox.l, bbox.b);
    if (std::find(cells.begin(), cells.end(), 1) == cells.end())
        return;

    const int r = kernel.radius;
    const int channels = source.channels();
    const int width = source.width();
    const int height = source.height();
    const int rows = bbox.b + 2 * r;
    const auto clamp_x = [&](int x) { return std::clamp(x, 0, width - 1); };
    const auto clamp_y = [&](int y) { return std::clamp(y, 0, height - 1); };

    // Horizontal pass over every row the vertical pass will read, full precision.
    std::vector<double> horizontal(std::size_t(rows) * bbox.l * channels, 0.0);
    for (int row = 0; row < rows; ++row)
    {
        const int y = clamp_y(bbox.q - r + row);
        double *out = horizontal.data() + std::size_t(row) * bbox.l * channels;
        for (int col = 0; col < bbox.l; ++col)
        {
            const int x = bbox.p + col;
            for (int k = -r; k <= r; ++k)
            {
                const double tap = kernel.taps[std::size_t(k + r)];
                const std::uint8_t *px = source.pixel(clamp_x(x + k), y);
                for (int c = 0; c < channels; ++c)
                    out[col * channels + c] += tap * px[c];
            }
        }
    }

    std::vector<double> acc(static_cast<std::size_t>(channels));
    for (int row = 0; row < bbox.b; ++row)
    {
        for (int col = 0; col < bbox.l; ++col)
        {
            if (!cells[std::size_t(row) * bbox.l + col])
                continue;
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int k = -r; k <= r; ++k)
            {
                const double tap = kernel.taps[std::size_t(k + r)];
                const double *in = horizontal.data() + (std::size_t(row + r + k) * bbox.l + col) * channels;
                for (int c = 0; c < channels; ++c)
                    acc[std::size_t(c)] += tap * in[c];
            }
            std::uint8_t *dst = target.pixel(bbox.p + col, bbox.q + row);
            for (int c = 0; c < channels; ++c)
                // values are non-negative, so std::round is half-away-from-zero here
                dst[c] = std::uint8_t(std::clamp(std::round(acc[std::size_t(c)]), 0.0, 255.0));
        }
    }
}

ImageBuffer blur_region(const ImageBuffer &img, const BoundingBox &bbox, const MaskRLE &mask, double sigma)
{
    ImageBuffer out = img;
    blur_region_into(img, out, bbox, mask, gaussian_kernel(sigma));
    return out;
}

} // namespace sisa
