#pragma once

// Pseudo-spectral simulator and verification workbench for the controlled
// convective Brinkman-Forchheimer equations on the periodic torus, with a
// dynamic-programming layer for the associated HJB structure.

#include "cbf/config.hpp"
#include "cbf/control.hpp"
#include "cbf/control_model.hpp"
#include "cbf/dynamics.hpp"
#include "cbf/field.hpp"
#include "cbf/grid.hpp"
#include "cbf/norms.hpp"
#include "cbf/operators.hpp"
#include "cbf/params.hpp"
#include "cbf/projection.hpp"
#include "cbf/random_field.hpp"
#include "cbf/report.hpp"
#include "cbf/snapshot.hpp"
#include "cbf/stokes.hpp"
#include "cbf/verify.hpp"
