#pragma once

#include <string>

#include "mitlgame/error.hpp"

// Code of the mitlgame::Error thrown by f, or "" when nothing is thrown.
template <class F>
std::string error_code(F&& f) {
  try {
    f();
  } catch (const mitlgame::Error& e) {
    return e.code();
  }
  return "";
}

template <class F>
mitlgame::ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const mitlgame::Error& e) {
    return e.kind();
  }
  return mitlgame::ErrorKind::Runtime;
}
