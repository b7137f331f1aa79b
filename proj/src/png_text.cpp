#include "png_text.hpp"

#include <algorithm>
#include <array>

#include <zlib.h>

#include "sisa/error.hpp"

namespace sisa::png_text
{

namespace
{

constexpr std::array<std::uint8_t, 8> signature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::uint32_t be32(const std::uint8_t *p)
{
    return std::uint32_t(p[0]) << 24 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 8 | p[3];
}

void put_be32(std::vector<std::uint8_t> &out, std::uint32_t v)
{
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

std::uint32_t chunk_crc(const std::string &type, const std::vector<std::uint8_t> &data)
{
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef *>(type.data()), uInt(type.size()));
    if (!data.empty()) // a null buffer would reset the running value
        crc = crc32(crc, data.data(), uInt(data.size()));
    return std::uint32_t(crc);
}

std::string inflate_text(const std::uint8_t *data, std::size_t size)
{
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK)
        throw Error(ErrorKind::Malformed, "zlib init failed");
    zs.next_in = const_cast<Bytef *>(data);
    zs.avail_in = uInt(size);
    std::string out;
    std::array<char, 16384> buffer{};
    int status = Z_OK;
    while (status == Z_OK)
    {
        zs.next_out = reinterpret_cast<Bytef *>(buffer.data());
        zs.avail_out = uInt(buffer.size());
        status = inflate(&zs, Z_NO_FLUSH);
        out.append(buffer.data(), buffer.size() - zs.avail_out);
        if (status == Z_BUF_ERROR && zs.avail_in == 0)
            break;
    }
    inflateEnd(&zs);
    if (status != Z_STREAM_END)
        throw Error(ErrorKind::Malformed, "compressed text chunk is corrupt");
    return out;
}

std::vector<std::uint8_t> deflate_text(std::string_view text)
{
    uLongf size = compressBound(uLong(text.size()));
    std::vector<std::uint8_t> out(size);
    if (compress2(out.data(), &size, reinterpret_cast<const Bytef *>(text.data()), uLong(text.size()),
                  Z_BEST_COMPRESSION) != Z_OK)
        throw Error(ErrorKind::Io, "zlib compression failed");
    out.resize(size);
    return out;
}

bool is_text_chunk(const Chunk &chunk)
{
    return chunk.type == "tEXt" || chunk.type == "zTXt" || chunk.type == "iTXt";
}

std::string_view chunk_keyword(const Chunk &chunk)
{
    const auto nul = std::find(chunk.data.begin(), chunk.data.end(), std::uint8_t(0));
    return {reinterpret_cast<const char *>(chunk.data.data()), std::size_t(nul - chunk.data.begin())};
}

std::string chunk_text(const Chunk &chunk)
{
    const std::size_t key_end = chunk_keyword(chunk).size();
    if (key_end >= chunk.data.size())
        throw Error(ErrorKind::Malformed, chunk.type + " chunk has no text separator");
    const std::uint8_t *body = chunk.data.data() + key_end + 1;
    const std::size_t body_size = chunk.data.size() - key_end - 1;

    if (chunk.type == "tEXt")
        return {reinterpret_cast<const char *>(body), body_size};
    if (chunk.type == "zTXt")
    {
        if (body_size < 1 || body[0] != 0)
            throw Error(ErrorKind::Malformed, "zTXt chunk uses an unknown compression method");
        return inflate_text(body + 1, body_size - 1);
    }
    // iTXt: flag, method, language\0, translated keyword\0, text
    if (body_size < 2)
        throw Error(ErrorKind::Malformed, "iTXt chunk is truncated");
    const bool compressed = body[0] != 0;
    const std::uint8_t *cursor = body + 2;
    const std::uint8_t *end = body + body_size;
    for (int skip = 0; skip < 2; ++skip)
    {
        cursor = std::find(cursor, end, std::uint8_t(0));
        if (cursor == end)
            throw Error(ErrorKind::Malformed, "iTXt chunk is truncated");
        ++cursor;
    }
    if (compressed)
        return inflate_text(cursor, std::size_t(end - cursor));
    return {reinterpret_cast<const char *>(cursor), std::size_t(end - cursor)};
}

} // namespace

std::vector<Chunk> parse_chunks(const std::vector<std::uint8_t> &file)
{
    if (file.size() < signature.size() || !std::equal(signature.begin(), signature.end(), file.begin()))
        throw Error(ErrorKind::UnsupportedFormat, "not a PNG file");
    std::vector<Chunk> chunks;
    std::size_t at = signature.size();
    while (at < file.size())
    {
        if (file.size() - at < 12)
            throw Error(ErrorKind::UnsupportedFormat, "PNG chunk header is truncated");
        const std::uint32_t length = be32(file.data() + at);
        if (length > file.size() - at - 12)
            throw Error(ErrorKind::UnsupportedFormat, "PNG chunk overruns the file");
        Chunk chunk;
        chunk.type.assign(reinterpret_cast<const char *>(file.data() + at + 4), 4);
        chunk.data.assign(file.begin() + std::ptrdiff_t(at + 8), file.begin() + std::ptrdiff_t(at + 8 + length));
        if (be32(file.data() + at + 8 + length) != chunk_crc(chunk.type, chunk.data))
            throw Error(ErrorKind::UnsupportedFormat, "PNG chunk " + chunk.type + " has a bad CRC");
        at += 12 + length;
        const bool end = chunk.type == "IEND";
        chunks.push_back(std::move(chunk));
        if (end)
            break;
    }
    if (chunks.empty() || chunks.front().type != "IHDR" || chunks.back().type != "IEND")
        throw Error(ErrorKind::UnsupportedFormat, "PNG must start with IHDR and end with IEND");
    return chunks;
}

std::vector<std::uint8_t> serialize_chunks(const std::vector<Chunk> &chunks)
{
    std::vector<std::uint8_t> out(signature.begin(), signature.end());
    for (const auto &chunk : chunks)
    {
        put_be32(out, std::uint32_t(chunk.data.size()));
        out.insert(out.end(), chunk.type.begin(), chunk.type.end());
        out.insert(out.end(), chunk.data.begin(), chunk.data.end());
        put_be32(out, chunk_crc(chunk.type, chunk.data));
    }
    return out;
}

std::optional<std::string> find_text(const std::vector<Chunk> &chunks, std::string_view keyword)
{
    for (const auto &chunk : chunks)
        if (is_text_chunk(chunk) && chunk_keyword(chunk) == keyword)
            return chunk_text(chunk);
    return std::nullopt;
}

void replace_text(std::vector<Chunk> &chunks, std::string_view keyword, std::string_view text,
                  std::size_t compress_above)
{
    std::erase_if(chunks, [&](const Chunk &chunk) { return is_text_chunk(chunk) && chunk_keyword(chunk) == keyword; });

    Chunk chunk;
    chunk.data.assign(keyword.begin(), keyword.end());
    chunk.data.push_back(0);
    if (text.size() > compress_above)
    {
        chunk.type = "zTXt";
        chunk.data.push_back(0); // deflate
        const auto packed = deflate_text(text);
        chunk.data.insert(chunk.data.end(), packed.begin(), packed.end());
    }
    else
    {
        chunk.type = "tEXt";
        chunk.data.insert(chunk.data.end(), text.begin(), text.end());
    }
    chunks.insert(chunks.end() - 1, std::move(chunk));
}

} // namespace sisa::png_text
