#pragma once

#include <optional>

#include "tsfeat/error.hpp"

// Kind of the tsfeat::Error thrown by `f`, or nullopt if none was thrown.
template <typename F>
std::optional<tsfeat::ErrorKind> thrown_kind(F&& f) {
    try {
        f();
    } catch (const tsfeat::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

#define CHECK_RAISES(expr, k) CHECK(thrown_kind([&] { (void)(expr); }) == std::optional{tsfeat::ErrorKind::k})
