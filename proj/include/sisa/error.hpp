#pragma once

#include <stdexcept>
#include <string>

namespace sisa
{

enum class ErrorKind
{
    Io,              // unreadable/unwritable file
    UnsupportedFormat,
    Validation,      // bad geometry, lengths, arguments
    Crypto,          // missing passphrase, cipher failure
    Checksum,        // CRC mismatch on restore: wrong key or tampered pixels
    Malformed,       // manifest/regions document cannot be parsed
    UnknownVersion,
    Invariant,       // document parses but violates a structural invariant
    MissingManifest,
};

const char *to_string(ErrorKind kind);

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace sisa
