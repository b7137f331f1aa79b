#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sisa/records.hpp"

namespace sisa
{

/// PNG text-chunk keyword carrying the manifest.
inline constexpr std::string_view manifest_chunk_keyword = "SISA";
/// Manifests longer than this go into a compressed zTXt chunk instead of tEXt.
inline constexpr std::size_t manifest_ztxt_threshold = 1024;

/**
 * Canonical JSON: fixed key order (see docs/manifest-schema.md), no
 * whitespace, ASCII only, binary fields base64. Equal manifests encode to
 * identical bytes.
 */
std::string encode_manifest(const ReconstructionManifest &manifest);

/// Strict inverse of encode_manifest. Throws Malformed, UnknownVersion or Invariant.
ReconstructionManifest decode_manifest(std::string_view bytes);

/// Structural checks shared by the decoder: geometry, lengths, record modes, disjoint masks.
void validate_manifest(const ReconstructionManifest &manifest);

/// Stores the manifest in a "SISA" text chunk, replacing any previous one. Image data is untouched.
void embed_manifest(const std::filesystem::path &png_path, const ReconstructionManifest &manifest);

/// Throws MissingManifest when the PNG has no "SISA" chunk, UnsupportedFormat for non-PNG input.
ReconstructionManifest extract_manifest(const std::filesystem::path &png_path);

/// Raw manifest bytes as stored in the chunk, without decoding.
std::string extract_manifest_bytes(const std::filesystem::path &png_path);

/// "<image path>.sisa.json"
std::filesystem::path sidecar_path(const std::filesystem::path &image_path);

void write_manifest_file(const std::filesystem::path &path, const ReconstructionManifest &manifest);
ReconstructionManifest read_manifest_file(const std::filesystem::path &path);

} // namespace sisa
