#pragma once

#include <Eigen/Core>

namespace eods {

using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

}  // namespace eods
