#pragma once

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace pmpc {

/// Verbosity read once from PREVIEW_MPC_LOG (0 = silent, 1 = info, 2 = debug).
inline int log_level() {
    static const int level = [] {
        const char* env = std::getenv("PREVIEW_MPC_LOG");
        if (env == nullptr) return 0;
        return std::atoi(env);
    }();
    return level;
}

template <typename... Args>
void log_info(Args&&... args) {
    if (log_level() >= 1) {
        std::ostringstream os;
        (os << ... << args);
        std::cerr << "[pmpc] " << os.str() << "\n";
    }
}

template <typename... Args>
void log_debug(Args&&... args) {
    if (log_level() >= 2) {
        std::ostringstream os;
        (os << ... << args);
        std::cerr << "[pmpc:debug] " << os.str() << "\n";
    }
}

}  // namespace pmpc
