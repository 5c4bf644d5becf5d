#pragma once

#include "pgptycho/dataset.hpp"
#include "pgptycho/errors.hpp"
#include "pgptycho/field.hpp"
#include "pgptycho/forward.hpp"
#include "pgptycho/io.hpp"
#include "pgptycho/loss.hpp"
#include "pgptycho/metrics.hpp"
#include "pgptycho/noise.hpp"
#include "pgptycho/propagation.hpp"
#include "pgptycho/scan.hpp"
#include "pgptycho/solver.hpp"
