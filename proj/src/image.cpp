#include "sisa/image.hpp"

#include <array>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "sisa/error.hpp"

namespace sisa
{

ImageBuffer::ImageBuffer(int width, int height, int channels)
    : ImageBuffer(width, height, channels,
                  std::vector<std::uint8_t>(std::size_t(width > 0 ? width : 0) *
                                            std::size_t(height > 0 ? height : 0) *
                                            std::size_t(channels > 0 ? channels : 0)))
{
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels))
{
    if (width < 1 || height < 1)
        throw Error(ErrorKind::Validation, "image dimensions must be at least 1x1");
    if (channels != 1 && channels != 3 && channels != 4)
        throw Error(ErrorKind::Validation, "channel count must be 1, 3 or 4");
    if (pixels_.size() != std::size_t(width) * std::size_t(height) * std::size_t(channels))
        throw Error(ErrorKind::Validation, "pixel buffer length does not match width*height*channels");
}

bool BoundingBox::fits(int width, int height) const noexcept
{
    return l >= 1 && b >= 1 && p >= 0 && q >= 0 && std::int64_t(p) + l <= width &&
           std::int64_t(q) + b <= height;
}

void validate_box(const BoundingBox &box, int width, int height)
{
    if (!box.fits(width, height))
        throw Error(ErrorKind::Validation,
                    "bounding box (" + std::to_string(box.p) + "," + std::to_string(box.q) + "," +
                        std::to_string(box.l) + "," + std::to_string(box.b) +
                        ") does not fit a " + std::to_string(width) + "x" +
                        std::to_string(height) + " image");
}

namespace
{

std::vector<std::uint8_t> read_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw Error(ErrorKind::Io, "read failed for " + path.string());
    return data;
}

std::string sniff(const std::vector<std::uint8_t> &data)
{
    static constexpr std::array<std::uint8_t, 8> png_sig = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (data.size() >= 8 && std::equal(png_sig.begin(), png_sig.end(), data.begin()))
        return "png";
    if (data.size() >= 3 && data[0] == 0xff && data[1] == 0xd8 && data[2] == 0xff)
        return "jpeg";
    if (data.size() >= 2 && data[0] == 'B' && data[1] == 'M')
        return "bmp";
    return {};
}

ImageBuffer decode_png(const std::vector<std::uint8_t> &data)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, data.data(), data.size()))
        throw Error(ErrorKind::UnsupportedFormat, std::string("png decode failed: ") + image.message);

    if (image.format & PNG_FORMAT_FLAG_LINEAR)
    {
        png_image_free(&image);
        throw Error(ErrorKind::UnsupportedFormat, "16-bit PNG input is not supported");
    }

    const bool color = image.format & PNG_FORMAT_FLAG_COLOR;
    const bool alpha = image.format & PNG_FORMAT_FLAG_ALPHA;
    int channels = 1;
    if (alpha)
    {
        // gray+alpha has no 2-channel representation here; widen to RGBA
        image.format = PNG_FORMAT_RGBA;
        channels = 4;
    }
    else if (color)
    {
        image.format = PNG_FORMAT_RGB;
        channels = 3;
    }
    else
    {
        image.format = PNG_FORMAT_GRAY;
    }

    ImageBuffer out(int(image.width), int(image.height), channels);
    if (!png_image_finish_read(&image, nullptr, out.pixels().data(), 0, nullptr))
        throw Error(ErrorKind::UnsupportedFormat, std::string("png decode failed: ") + image.message);
    return out;
}

struct JpegErrorManager
{
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo)
{
    auto *mgr = reinterpret_cast<JpegErrorManager *>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, mgr->message);
    std::longjmp(mgr->jump, 1);
}

ImageBuffer decode_jpeg(const std::vector<std::uint8_t> &data)
{
    jpeg_decompress_struct cinfo{};
    JpegErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;

    // Everything touched after setjmp is either POD or owned by cinfo.
    std::vector<std::uint8_t> pixels;
    int width = 0, height = 0, channels = 0;
    if (setjmp(err.jump))
    {
        jpeg_destroy_decompress(&cinfo);
        throw Error(ErrorKind::UnsupportedFormat, std::string("jpeg decode failed: ") + err.message);
    }

    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, data.data(), static_cast<unsigned long>(data.size()));
    jpeg_read_header(&cinfo, TRUE);
    if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK)
    {
        jpeg_destroy_decompress(&cinfo);
        throw Error(ErrorKind::UnsupportedFormat, "CMYK JPEG input is not supported");
    }
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);

    width = int(cinfo.output_width);
    height = int(cinfo.output_height);
    channels = cinfo.output_components;
    pixels.resize(std::size_t(width) * height * channels);
    while (cinfo.output_scanline < cinfo.output_height)
    {
        JSAMPROW row = pixels.data() + std::size_t(cinfo.output_scanline) * width * channels;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return ImageBuffer(width, height, channels, std::move(pixels));
}

std::uint32_t le32(const std::vector<std::uint8_t> &d, std::size_t at)
{
    return std::uint32_t(d[at]) | std::uint32_t(d[at + 1]) << 8 | std::uint32_t(d[at + 2]) << 16 |
           std::uint32_t(d[at + 3]) << 24;
}

std::uint16_t le16(const std::vector<std::uint8_t> &d, std::size_t at)
{
    return std::uint16_t(d[at] | d[at + 1] << 8);
}

// Uncompressed BMP: 8-bit paletted, 24-bit BGR, 32-bit BGRA (BI_RGB or BI_BITFIELDS).
ImageBuffer decode_bmp(const std::vector<std::uint8_t> &data)
{
    if (data.size() < 54)
        throw Error(ErrorKind::UnsupportedFormat, "bmp: truncated header");
    const std::uint32_t pixel_offset = le32(data, 10);
    const std::uint32_t dib_size = le32(data, 14);
    if (dib_size < 40)
        throw Error(ErrorKind::UnsupportedFormat, "bmp: only BITMAPINFOHEADER or later is supported");
    const auto width = std::int32_t(le32(data, 18));
    const auto raw_height = std::int32_t(le32(data, 22));
    const std::uint16_t bpp = le16(data, 28);
    const std::uint32_t compression = le32(data, 30);
    std::uint32_t palette_size = le32(data, 46);

    if (width <= 0 || raw_height == 0)
        throw Error(ErrorKind::UnsupportedFormat, "bmp: invalid dimensions");
    if (!(compression == 0 || (compression == 3 && bpp == 32)))
        throw Error(ErrorKind::UnsupportedFormat, "bmp: compressed bitmaps are not supported");
    if (bpp != 8 && bpp != 24 && bpp != 32)
        throw Error(ErrorKind::UnsupportedFormat, "bmp: unsupported bit depth " + std::to_string(bpp));

    const bool top_down = raw_height < 0;
    const int height = top_down ? -raw_height : raw_height;
    const std::size_t stride = (std::size_t(width) * bpp / 8 + 3) & ~std::size_t(3);
    if (pixel_offset + stride * height > data.size())
        throw Error(ErrorKind::UnsupportedFormat, "bmp: truncated pixel data");

    std::vector<std::array<std::uint8_t, 3>> palette;
    bool gray_palette = true;
    if (bpp == 8)
    {
        if (palette_size == 0)
            palette_size = 256;
        const std::size_t palette_at = 14 + dib_size;
        if (palette_at + palette_size * 4 > data.size())
            throw Error(ErrorKind::UnsupportedFormat, "bmp: truncated palette");
        for (std::uint32_t i = 0; i < palette_size; ++i)
        {
            const std::size_t at = palette_at + i * 4;
            palette.push_back({data[at + 2], data[at + 1], data[at]});
            gray_palette = gray_palette && data[at] == data[at + 1] && data[at + 1] == data[at + 2];
        }
    }

    const int channels = bpp == 32 ? 4 : (bpp == 8 && gray_palette ? 1 : 3);
    ImageBuffer out(width, height, channels);
    for (int y = 0; y < height; ++y)
    {
        const int src_row = top_down ? y : height - 1 - y;
        const std::uint8_t *src = data.data() + pixel_offset + stride * src_row;
        std::uint8_t *dst = out.pixel(0, y);
        for (int x = 0; x < width; ++x)
        {
            if (bpp == 8)
            {
                if (src[x] >= palette.size())
                    throw Error(ErrorKind::UnsupportedFormat, "bmp: palette index out of range");
                const auto &entry = palette[src[x]];
                if (channels == 1)
                    *dst++ = entry[0];
                else
                    for (auto v : entry)
                        *dst++ = v;
            }
            else
            {
                const std::uint8_t *px = src + std::size_t(x) * (bpp / 8);
                *dst++ = px[2];
                *dst++ = px[1];
                *dst++ = px[0];
                if (bpp == 32)
                    *dst++ = px[3];
            }
        }
    }
    return out;
}

} // namespace

std::string sniff_format(const std::filesystem::path &path)
{
    auto format = sniff(read_file(path));
    if (format.empty())
        throw Error(ErrorKind::UnsupportedFormat, path.string() + ": not a PNG, JPEG or BMP file");
    return format;
}

ImageBuffer load_image(const std::filesystem::path &path)
{
    const auto data = read_file(path);
    const auto format = sniff(data);
    if (format == "png")
        return decode_png(data);
    if (format == "jpeg")
        return decode_jpeg(data);
    if (format == "bmp")
        return decode_bmp(data);
    throw Error(ErrorKind::UnsupportedFormat, path.string() + ": not a PNG, JPEG or BMP file");
}

void save_lossless(const ImageBuffer &img, const std::filesystem::path &path)
{
    if (img.width() < 1 || img.height() < 1)
        throw Error(ErrorKind::Validation, "cannot save an empty image");

    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = png_uint_32(img.width());
    image.height = png_uint_32(img.height());
    switch (img.channels())
    {
    case 1: image.format = PNG_FORMAT_GRAY; break;
    case 3: image.format = PNG_FORMAT_RGB; break;
    case 4: image.format = PNG_FORMAT_RGBA; break;
    default: throw Error(ErrorKind::Validation, "channel count must be 1, 3 or 4");
    }

    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(image, size, 0, img.pixels().data(), 0, nullptr))
        throw Error(ErrorKind::Io, std::string("png encode failed: ") + image.message);
    std::vector<std::uint8_t> encoded(size);
    if (!png_image_write_to_memory(&image, encoded.data(), &size, 0, img.pixels().data(), 0, nullptr))
        throw Error(ErrorKind::Io, std::string("png encode failed: ") + image.message);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char *>(encoded.data()), std::streamsize(size));
    if (!out)
        throw Error(ErrorKind::Io, "write failed for " + path.string());
}

} // namespace sisa
