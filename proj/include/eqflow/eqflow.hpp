#pragma once

#include "eqflow/ambient.hpp"
#include "eqflow/bounds.hpp"
#include "eqflow/config.hpp"
#include "eqflow/curve.hpp"
#include "eqflow/flow.hpp"
#include "eqflow/geometry.hpp"
#include "eqflow/io.hpp"
#include "eqflow/reference_cases.hpp"
