#pragma once

namespace shapuq {

inline constexpr const char* kVersionString = "0.1.0";

}
