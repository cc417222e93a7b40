#pragma once

#include <gtest/gtest.h>

#include "oracle.hpp"

namespace sconn {

inline void PrintTo(const Scalar& x, std::ostream* os) { *os << x.str(); }
inline void PrintTo(const Form& x, std::ostream* os) { *os << x.str(); }
inline void PrintTo(const SuperOperator& x, std::ostream* os) { *os << x.str(); }

}  // namespace sconn
