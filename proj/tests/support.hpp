#pragma once

#include <functional>
#include <string>

#include "doctest.h"
#include "quicscatter/common/error.hpp"

namespace quicscatter::testing {

// Runs fn and reports the Errc it threw, if any.
inline std::string thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return std::string(errc_name(e.code()));
  } catch (const std::exception& e) {
    return std::string("foreign: ") + e.what();
  }
  return "none";
}

}  // namespace quicscatter::testing

#define CHECK_ERRC(expr, code) \
  CHECK(::quicscatter::testing::thrown_code([&] { (void)(expr); }) == ::quicscatter::errc_name(code))
