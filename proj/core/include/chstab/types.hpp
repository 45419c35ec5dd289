#pragma once

#include <Eigen/Core>

namespace chstab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Spectral state layout: [y^1 .. y^K, z^1 .. z^K].
struct StateLayout {
  int modes = 0;

  int size() const { return 2 * modes; }
  int y(int j) const { return j; }
  int z(int j) const { return modes + j; }
};

}  // namespace chstab
