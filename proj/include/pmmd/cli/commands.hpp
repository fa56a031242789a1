#pragma once

#include <cstdio>

namespace pmmd::cli {

inline int run(int /*argc*/, char** /*argv*/) {
    std::fprintf(stderr, "pmmd: commands not wired yet\n");
    return 2;
}

}  // namespace pmmd::cli
