#pragma once

#include <stdexcept>
#include <string>

namespace mnr {

// Coarse error classes; they map onto the C API status codes and the CLI
// exit codes (invalid_argument -> 2, parse -> 3, numeric -> 4, band -> 5).
enum class errc {
    ok = 0,
    invalid_argument,
    parse,
    numeric,
    io,
    band,
};

class Error : public std::runtime_error {
  public:
    Error(errc code, std::string msg, int feature = -1)
        : std::runtime_error(std::move(msg)), code_(code), feature_(feature) {}

    errc code() const { return code_; }

    // 0-based feature index the failure is attached to, or -1.
    int feature() const { return feature_; }

  private:
    errc code_;
    int feature_;
};

inline Error invalid_argument_error(std::string msg) {
    return Error(errc::invalid_argument, std::move(msg));
}

inline Error parse_error(std::string msg) {
    return Error(errc::parse, std::move(msg));
}

inline Error numeric_error(std::string msg, int feature = -1) {
    return Error(errc::numeric, std::move(msg), feature);
}

inline Error io_error(std::string msg) {
    return Error(errc::io, std::move(msg));
}

} // namespace mnr
