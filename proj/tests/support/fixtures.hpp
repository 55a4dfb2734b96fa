#pragma once

#include <string>

#include "opdyn/io.hpp"

namespace opdyn_test {

inline std::string fixture_path(const std::string& name) {
    return std::string(OPDYN_FIXTURE_DIR) + "/" + name;
}

inline opdyn::AtomicSystem load_fixture(const std::string& name) {
    return opdyn::load_system(fixture_path(name));
}

}  // namespace opdyn_test
