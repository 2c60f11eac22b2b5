#pragma once

#include <optional>

#include "rfgan/error.hpp"

// Error code thrown by f, or nothing when it returns normally.
template <class F>
std::optional<rfgan::ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const rfgan::Error& e) {
    return e.code();
  }
  return std::nullopt;
}
