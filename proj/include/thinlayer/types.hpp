#pragma once

#include <Eigen/Dense>

namespace thinlayer {

// Small fixed-capacity types: the surface has dimension 1 or 2 and the
// ambient space dimension 2 or 3, so none of these ever touch the heap.
using SurfVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using SurfMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;
using AmbientVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

}  // namespace thinlayer
