#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sisa
{

using Salt = std::array<std::uint8_t, 16>;
using Iv = std::array<std::uint8_t, 16>;
using Key = std::array<std::uint8_t, 32>;

inline constexpr std::string_view kdf_pbkdf2_sha256 = "pbkdf2-hmac-sha256";
inline constexpr std::string_view kdf_scrypt = "scrypt";

/// KDF choice plus its cost parameters: [iterations] for PBKDF2, [N, r, p] for scrypt.
struct KdfSpec
{
    std::string id{kdf_pbkdf2_sha256};
    std::vector<std::uint64_t> params{600000};

    bool operator==(const KdfSpec &) const = default;
};

/// Derived cipher key plus everything the restore side needs to derive it again.
struct KeyMaterial
{
    Key key{};
    Salt salt{};
    KdfSpec kdf;

    KeyMaterial() = default;
    KeyMaterial(const KeyMaterial &) = default;
    KeyMaterial &operator=(const KeyMaterial &) = default;
    ~KeyMaterial();
};

KdfSpec default_kdf(std::string_view kdf_id);

KeyMaterial derive_key(std::string_view passphrase, const Salt &salt, const KdfSpec &kdf);

/// AES-256 in CFB mode with 128-bit feedback segments, in place. Length preserving.
void aes256_cfb_encrypt(const Key &key, const Iv &iv, std::span<std::uint8_t> data);
void aes256_cfb_decrypt(const Key &key, const Iv &iv, std::span<std::uint8_t> data);

std::uint32_t crc32(std::span<const std::uint8_t> data);

/// Source of salts and IVs. Implementations must tolerate concurrent callers.
class EntropySource
{
public:
    virtual ~EntropySource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    template <std::size_t N>
    std::array<std::uint8_t, N> draw()
    {
        std::array<std::uint8_t, N> out{};
        fill(out);
        return out;
    }
};

/// OpenSSL's CSPRNG.
class SystemEntropy final : public EntropySource
{
public:
    void fill(std::span<std::uint8_t> out) override;
};

/// Deterministic generator for tests and benchmarks. Not for protecting real images.
class SeededEntropy final : public EntropySource
{
public:
    explicit SeededEntropy(std::uint64_t seed) : engine_(seed) {}
    void fill(std::span<std::uint8_t> out) override;

private:
    std::mutex mutex_;
    std::mt19937_64 engine_;
};

std::string base64_encode(std::span<const std::uint8_t> data);
/// Strict decode; throws ErrorKind::Malformed on bad alphabet or padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

} // namespace sisa
