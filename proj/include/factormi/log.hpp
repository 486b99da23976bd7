#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace factormi::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

inline Level& mutable_level() {
    static Level lvl = [] {
        const char* env = std::getenv("FACTORMI_LOG");
        if (!env) return Level::warn;
        if (std::strcmp(env, "error") == 0) return Level::error;
        if (std::strcmp(env, "warn") == 0) return Level::warn;
        if (std::strcmp(env, "info") == 0) return Level::info;
        if (std::strcmp(env, "debug") == 0) return Level::debug;
        return Level::warn;
    }();
    return lvl;
}

inline Level level() { return mutable_level(); }
inline void set_level(Level lvl) { mutable_level() = lvl; }

inline void write(Level lvl, const std::string& msg) {
    if (lvl > level()) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(lvl)], msg.c_str());
}

inline void error(const std::string& msg) { write(Level::error, msg); }
inline void warn(const std::string& msg) { write(Level::warn, msg); }
inline void info(const std::string& msg) { write(Level::info, msg); }
inline void debug(const std::string& msg) { write(Level::debug, msg); }

}  // namespace factormi::log
