#pragma once

// Umbrella header.

#include "framelab/core.hpp"
#include "framelab/quadrature.hpp"
#include "framelab/measure.hpp"
#include "framelab/test_function.hpp"
#include "framelab/sip.hpp"
#include "framelab/spectra.hpp"
#include "framelab/bounds.hpp"
#include "framelab/constructions.hpp"
#include "framelab/catalog.hpp"
#include "framelab/io.hpp"
