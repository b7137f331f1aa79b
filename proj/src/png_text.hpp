#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Chunk-level PNG editing. Only ancillary text chunks are added or removed;
// every other chunk, IDAT included, is copied through byte for byte.
namespace sisa::png_text
{

struct Chunk
{
    std::string type; // four ASCII letters
    std::vector<std::uint8_t> data;
};

/// Splits a PNG stream into chunks, checking the signature and every CRC.
std::vector<Chunk> parse_chunks(const std::vector<std::uint8_t> &file);
std::vector<std::uint8_t> serialize_chunks(const std::vector<Chunk> &chunks);

/// Text of the first tEXt/zTXt/iTXt chunk with this keyword.
std::optional<std::string> find_text(const std::vector<Chunk> &chunks, std::string_view keyword);

/// Removes every text chunk with this keyword, then inserts one before IEND.
/// Uses zTXt when the text is longer than compress_above bytes.
void replace_text(std::vector<Chunk> &chunks, std::string_view keyword, std::string_view text,
                  std::size_t compress_above);

} // namespace sisa::png_text
