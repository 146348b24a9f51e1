#pragma once

#include "fsse/scenario.hpp"

#include <string>

namespace fsse::testing {

inline std::string fixture(const std::string& name) {
    return std::string(FSSE_FIXTURE_DIR) + "/" + name;
}

inline Scenario load_fixture(const std::string& name) {
    return load_scenario(fixture(name));
}

} // namespace fsse::testing
