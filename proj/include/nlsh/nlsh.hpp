#pragma once

#include "nlsh/diagnostics.hpp"
#include "nlsh/errors.hpp"
#include "nlsh/exact.hpp"
#include "nlsh/experiments.hpp"
#include "nlsh/fft.hpp"
#include "nlsh/grid.hpp"
#include "nlsh/integrator.hpp"
#include "nlsh/models.hpp"
#include "nlsh/tableau.hpp"
