#pragma once

#include <string>

namespace pipenet {

/// BRANCH1: roots of the symmetric characteristic function (simple
/// eigenvalues, eigenvector equal on all edges). BRANCH2: roots of the
/// antisymmetric one, phi(0) = 0, double semisimple eigenvalues.
enum class Branch { one = 1, two = 2 };

inline std::string to_string(Branch b) { return b == Branch::one ? "BRANCH1" : "BRANCH2"; }

}  // namespace pipenet
