#pragma once

#include <stdexcept>
#include <string>

namespace socdyn {

// A potential or model object that cannot be used at all (non-finite values,
// nonpositive variance, ...).  Soft validation failures go through
// ValidationReport instead.
struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config-file problems; carries the offending key for the CLI message.
struct config_error : std::runtime_error {
    std::string key;
    config_error(std::string k, const std::string& what)
        : std::runtime_error(what), key(std::move(k)) {}
};

// Filesystem trouble around experiment artifacts (unwritable directory,
// failed file create).  Kept distinct from computation failures so the CLI
// can map it to the config/I-O exit code.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace socdyn
