#ifndef BDKIN_TYPES_HPP_
#define BDKIN_TYPES_HPP_

#include <Eigen/Core>

namespace bdkin {

using Real = double;
using Index = Eigen::Index;

// Cluster-indexed data. Entry i of an Array holds the value for cluster
// size l = i + 1; arrays therefore always start at l = 1.
using Array = Eigen::ArrayXd;

} // namespace bdkin

#endif // BDKIN_TYPES_HPP_
