#pragma once

namespace sched {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sched
