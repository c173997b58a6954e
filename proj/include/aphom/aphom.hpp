#pragma once

// Umbrella header.

#include "aphom/ap/pore_distribution.hpp"
#include "aphom/ap/torus.hpp"
#include "aphom/ap/trig_polynomial.hpp"
#include "aphom/core/errors.hpp"
#include "aphom/core/fields.hpp"
#include "aphom/core/types.hpp"
#include "aphom/core/worker_pool.hpp"
#include "aphom/fem/assembly.hpp"
#include "aphom/fem/krylov.hpp"
#include "aphom/fem/q1_element.hpp"
#include "aphom/fem/sparse_operator.hpp"
#include "aphom/fine/fine_solver.hpp"
#include "aphom/geometry/cell_geometry.hpp"
#include "aphom/geometry/epsilon_domain.hpp"
#include "aphom/geometry/mesh.hpp"
#include "aphom/harness/config.hpp"
#include "aphom/harness/convergence.hpp"
#include "aphom/harness/properties.hpp"
#include "aphom/harness/runs.hpp"
#include "aphom/homogenizer/cell_domain.hpp"
#include "aphom/homogenizer/homogenizer.hpp"
#include "aphom/macro/macro_solver.hpp"
#include "aphom/memory/kernel.hpp"
#include "aphom/memory/volterra.hpp"
