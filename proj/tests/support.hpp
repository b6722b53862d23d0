// Shared helpers for the test suites.

#pragma once

#include "dle/linalg.hpp"

#include <initializer_list>
#include <string>

namespace dletest {

inline dle::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    const auto nrows = static_cast<dle::Index>(rows.size());
    const auto ncols = static_cast<dle::Index>(rows.begin()->size());
    dle::Matrix m(nrows, ncols);
    dle::Index i = 0;
    for (const auto& row : rows) {
        dle::Index j = 0;
        for (double value : row) m(i, j++) = value;
        ++i;
    }
    return m;
}

inline dle::Vector vec(std::initializer_list<double> values) {
    dle::Vector v(static_cast<dle::Index>(values.size()));
    dle::Index i = 0;
    for (double value : values) v(i++) = value;
    return v;
}

inline std::string fixture(const std::string& name) {
    return std::string(DLE_FIXTURES_DIR) + "/" + name;
}

}  // namespace dletest
