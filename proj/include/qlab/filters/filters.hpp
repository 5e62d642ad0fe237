#pragma once

#include "qlab/filters/conditional.hpp"
#include "qlab/filters/linear.hpp"
#include "qlab/filters/nonlinear.hpp"
