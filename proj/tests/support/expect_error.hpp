#pragma once

#include <string>

#include "homodyne/errors.hpp"

namespace homodyne::testing {

// Code of the homodyne::Error thrown by f, or nullopt-like sentinel when none is thrown.
template <class F>
std::string thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return std::string(to_string(e.code()));
  } catch (const std::exception& e) {
    return std::string("std::exception: ") + e.what();
  }
  return "none";
}

}  // namespace homodyne::testing
