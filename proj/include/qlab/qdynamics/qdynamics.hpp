#pragma once

#include "qlab/qdynamics/open_system.hpp"
#include "qlab/qdynamics/phase_space.hpp"
#include "qlab/qdynamics/schrodinger.hpp"
