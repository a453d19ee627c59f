#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace suitmap {

// Base class for every data-level failure (bad inputs, invalid state).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text; carries the 1-based line where parsing stopped.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), message_(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::size_t line_;
};

class AlignmentError : public Error {
public:
    AlignmentError(const std::string& what, std::size_t index, std::string field)
        : Error(what), index_(index), field_(std::move(field)) {}
    std::size_t index() const noexcept { return index_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t index_;
    std::string field_;
};

// Configuration schema violation; `path()` is the JSON path of the offending key.
class ConfigError : public Error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace suitmap
