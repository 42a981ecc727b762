#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oelab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input, family mismatch, bad flags. CLI exit code 1.
struct UsageError : Error {
    using Error::Error;
};

// A BFS word length would need a radius above the group's cap.
struct CapExceeded : Error {
    int cap;
    CapExceeded(const std::string& what, int cap_) : Error(what), cap(cap_) {}
};

// Memory budget (OELAB_BUDGET_MB) or an enumeration limit was hit.
struct ResourceExhausted : Error {
    using Error::Error;
};

struct TilingViolation : Error {
    int k;
    std::string first, second;
    TilingViolation(int k_, std::string a, std::string b)
        : Error("tiling overlap at k=" + std::to_string(k_) + ": " + a + " and " + b),
          k(k_), first(std::move(a)), second(std::move(b)) {}
};

struct NotInTile : Error {
    using Error::Error;
};

struct DepthExhausted : Error {
    using Error::Error;
};

struct WindowExhausted : Error {
    using Error::Error;
};

struct TruncationError : Error {
    using Error::Error;
};

struct NotApplicable : Error {
    using Error::Error;
};

// Enumeration memory budget in bytes, read from OELAB_BUDGET_MB (default 1024).
std::size_t budget_bytes();

}  // namespace oelab
