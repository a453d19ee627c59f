#pragma once

#include <span>

#include "suitmap/learners.hpp"

namespace suitmap {

double logistic_probability(const LogisticParams& p, std::span<const double> x);

}  // namespace suitmap
