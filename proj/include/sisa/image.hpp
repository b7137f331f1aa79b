#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sisa
{

/**
 * Decoded 8-bit raster. Pixels are row-major with channels interleaved,
 * so pixel (x, y) channel c lives at ((y * width + x) * channels + c).
 */
class ImageBuffer
{
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height, int channels);
    ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return std::size_t(width_) * std::size_t(height_); }

    const std::vector<std::uint8_t> &pixels() const noexcept { return pixels_; }
    std::vector<std::uint8_t> &pixels() noexcept { return pixels_; }

    std::uint8_t *pixel(int x, int y) { return pixels_.data() + offset(x, y); }
    const std::uint8_t *pixel(int x, int y) const { return pixels_.data() + offset(x, y); }

    bool operator==(const ImageBuffer &) const = default;

private:
    std::size_t offset(int x, int y) const
    {
        return (std::size_t(y) * std::size_t(width_) + std::size_t(x)) * std::size_t(channels_);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Axis-aligned box: (p, q) top-left corner, l wide, b high.
struct BoundingBox
{
    int p = 0;
    int q = 0;
    int l = 0;
    int b = 0;

    std::size_t area() const noexcept { return std::size_t(l) * std::size_t(b); }
    bool fits(int width, int height) const noexcept;

    bool operator==(const BoundingBox &) const = default;
};

/// Throws ErrorKind::Validation unless the box has positive size and lies inside the image.
void validate_box(const BoundingBox &box, int width, int height);

/// Decodes PNG, JPEG or BMP (sniffed from the file header). Throws on 16-bit input.
ImageBuffer load_image(const std::filesystem::path &path);

/// Lower-case name of the detected container format ("png", "jpeg", "bmp").
std::string sniff_format(const std::filesystem::path &path);

/// Writes an 8-bit PNG; decoding the file yields the identical buffer.
void save_lossless(const ImageBuffer &img, const std::filesystem::path &path);

} // namespace sisa
