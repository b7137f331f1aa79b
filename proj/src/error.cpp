#include "sisa/error.hpp"

namespace sisa
{

const char *to_string(ErrorKind kind)
{
    switch (kind)
    {
    case ErrorKind::Io: return "io";
    case ErrorKind::UnsupportedFormat: return "unsupported-format";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Crypto: return "crypto";
    case ErrorKind::Checksum: return "checksum";
    case ErrorKind::Malformed: return "malformed";
    case ErrorKind::UnknownVersion: return "unknown-version";
    case ErrorKind::Invariant: return "invariant";
    case ErrorKind::MissingManifest: return "missing-manifest";
    }
    return "unknown";
}

} // namespace sisa
