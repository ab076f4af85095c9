#pragma once

#include "certificate.hpp"
#include "errors.hpp"
#include "invariants.hpp"
#include "io.hpp"
#include "knot.hpp"
#include "knot_io.hpp"
#include "lattice.hpp"
#include "menger.hpp"
#include "mesh.hpp"
#include "pipeline.hpp"
#include "verify.hpp"
