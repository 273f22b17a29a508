#pragma once

#include "oplattice/error.hpp"
#include "oplattice/linalg.hpp"
#include "oplattice/projector.hpp"
#include "oplattice/spectral.hpp"
#include "oplattice/lattice.hpp"
#include "oplattice/states.hpp"
#include "oplattice/algebras.hpp"
#include "oplattice/dynamics.hpp"
#include "oplattice/ccr.hpp"
#include "oplattice/gns.hpp"
#include "oplattice/json_io.hpp"
