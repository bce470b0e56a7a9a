#pragma once

#include <stdexcept>
#include <string>

namespace stav {

// Shape/argument violation in a numeric primitive.
class shape_error : public std::runtime_error {
public:
    explicit shape_error(const std::string& msg) : std::runtime_error("shape error: " + msg) {}
};

// Bad key, unparsable value, or out-of-range setting.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error("config error: " + msg) {}
};

// Training diverged or produced non-finite numbers.
class train_error : public std::runtime_error {
public:
    explicit train_error(const std::string& msg) : std::runtime_error("train error: " + msg) {}
};

enum class io_errc {
    bad_magic,
    bad_version,
    bad_header,
    truncated,
    trailing_data,
    pixel_out_of_range,
    file_unreadable,
};

const char* io_errc_name(io_errc c);

// File-format violation; `code()` identifies the exact failure class.
class io_error : public std::runtime_error {
public:
    io_error(io_errc code, const std::string& msg)
        : std::runtime_error(std::string(io_errc_name(code)) + ": " + msg), code_(code) {}
    io_errc code() const noexcept { return code_; }

private:
    io_errc code_;
};

inline const char* io_errc_name(io_errc c) {
    switch (c) {
    case io_errc::bad_magic: return "bad magic";
    case io_errc::bad_version: return "unsupported version";
    case io_errc::bad_header: return "bad header";
    case io_errc::truncated: return "truncated payload";
    case io_errc::trailing_data: return "trailing data";
    case io_errc::pixel_out_of_range: return "pixel out of range";
    case io_errc::file_unreadable: return "file unreadable";
    }
    return "io error";
}

}  // namespace stav
