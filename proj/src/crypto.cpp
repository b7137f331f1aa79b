#include "sisa/crypto.hpp"

#include <limits>
#include <memory>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>
#include <zlib.h>

#include "sisa/error.hpp"

namespace sisa
{

KeyMaterial::~KeyMaterial()
{
    OPENSSL_cleanse(key.data(), key.size());
}

KdfSpec default_kdf(std::string_view kdf_id)
{
    if (kdf_id == kdf_pbkdf2_sha256)
        return {std::string(kdf_id), {600000}};
    if (kdf_id == kdf_scrypt)
        return {std::string(kdf_id), {1u << 15, 8, 1}};
    throw Error(ErrorKind::Crypto, "unknown kdf '" + std::string(kdf_id) + "'");
}

KeyMaterial derive_key(std::string_view passphrase, const Salt &salt, const KdfSpec &kdf)
{
    if (passphrase.empty())
        throw Error(ErrorKind::Crypto, "passphrase must not be empty");

    KeyMaterial out;
    out.salt = salt;
    out.kdf = kdf;
    if (kdf.id == kdf_pbkdf2_sha256)
    {
        if (kdf.params.size() != 1 || kdf.params[0] == 0 ||
            kdf.params[0] > std::uint64_t(std::numeric_limits<int>::max()))
            throw Error(ErrorKind::Crypto, "pbkdf2 expects one positive iteration count");
        if (PKCS5_PBKDF2_HMAC(passphrase.data(), int(passphrase.size()), salt.data(), int(salt.size()),
                              int(kdf.params[0]), EVP_sha256(), int(out.key.size()), out.key.data()) != 1)
            throw Error(ErrorKind::Crypto, "pbkdf2 derivation failed");
    }
    else if (kdf.id == kdf_scrypt)
    {
        if (kdf.params.size() != 3)
            throw Error(ErrorKind::Crypto, "scrypt expects parameters [N, r, p]");
        if (EVP_PBE_scrypt(passphrase.data(), passphrase.size(), salt.data(), salt.size(), kdf.params[0],
                           kdf.params[1], kdf.params[2], 0, out.key.data(), out.key.size()) != 1)
            throw Error(ErrorKind::Crypto, "scrypt derivation failed (check N is a power of two)");
    }
    else
    {
        throw Error(ErrorKind::Crypto, "unknown kdf '" + kdf.id + "'");
    }
    return out;
}

namespace
{

struct CipherCtxDeleter
{
    void operator()(EVP_CIPHER_CTX *ctx) const { EVP_CIPHER_CTX_free(ctx); }
};

void aes256_cfb(const Key &key, const Iv &iv, std::span<std::uint8_t> data, bool encrypt)
{
    if (data.empty())
        return;
    std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
    if (!ctx || EVP_CipherInit_ex(ctx.get(), EVP_aes_256_cfb128(), nullptr, key.data(), iv.data(),
                                  encrypt ? 1 : 0) != 1)
        throw Error(ErrorKind::Crypto, "cipher initialisation failed");

    // EVP_CipherUpdate takes an int length
    constexpr std::size_t chunk = std::size_t(1) << 30;
    for (std::size_t done = 0; done < data.size(); done += chunk)
    {
        const int n = int(std::min(chunk, data.size() - done));
        int out_len = 0;
        if (EVP_CipherUpdate(ctx.get(), data.data() + done, &out_len, data.data() + done, n) != 1 ||
            out_len != n)
            throw Error(ErrorKind::Crypto, "cipher update failed");
    }
    int tail = 0;
    if (EVP_CipherFinal_ex(ctx.get(), data.data() + data.size(), &tail) != 1 || tail != 0)
        throw Error(ErrorKind::Crypto, "cipher finalisation failed");
}

} // namespace

void aes256_cfb_encrypt(const Key &key, const Iv &iv, std::span<std::uint8_t> data)
{
    aes256_cfb(key, iv, data, true);
}

void aes256_cfb_decrypt(const Key &key, const Iv &iv, std::span<std::uint8_t> data)
{
    aes256_cfb(key, iv, data, false);
}

std::uint32_t crc32(std::span<const std::uint8_t> data)
{
    uLong crc = ::crc32(0L, Z_NULL, 0);
    constexpr std::size_t chunk = std::size_t(1) << 30;
    for (std::size_t done = 0; done < data.size(); done += chunk)
        crc = ::crc32(crc, data.data() + done, uInt(std::min(chunk, data.size() - done)));
    return std::uint32_t(crc);
}

void SystemEntropy::fill(std::span<std::uint8_t> out)
{
    if (!out.empty() && RAND_bytes(out.data(), int(out.size())) != 1)
        throw Error(ErrorKind::Crypto, "system entropy source failed");
}

void SeededEntropy::fill(std::span<std::uint8_t> out)
{
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < out.size(); i += 8)
    {
        std::uint64_t word = engine_();
        for (std::size_t k = 0; k < 8 && i + k < out.size(); ++k, word >>= 8)
            out[i + k] = std::uint8_t(word);
    }
}

std::string base64_encode(std::span<const std::uint8_t> data)
{
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char *>(out.data()), data.data(), int(data.size()));
    out.resize(std::size_t(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text)
{
    if (text.size() % 4 != 0)
        throw Error(ErrorKind::Malformed, "base64 length is not a multiple of 4");
    std::size_t padding = 0;
    if (!text.empty() && text.back() == '=')
        padding = text.size() >= 2 && text[text.size() - 2] == '=' ? 2 : 1;
    for (std::size_t i = 0; i < text.size() - padding; ++i)
    {
        const char c = text[i];
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                        c == '+' || c == '/';
        if (!ok)
            throw Error(ErrorKind::Malformed, "invalid base64 character");
    }
    std::vector<std::uint8_t> out(3 * (text.size() / 4));
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char *>(text.data()), int(text.size()));
    if (n < 0)
        throw Error(ErrorKind::Malformed, "invalid base64 data");
    // EVP_DecodeBlock keeps the zero bytes produced by '=' padding
    out.resize(std::size_t(n) - padding);
    return out;
}

} // namespace sisa
