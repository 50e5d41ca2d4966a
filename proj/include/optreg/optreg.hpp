#pragma once

// Umbrella header for the library (the CLI lives in optreg/cli/).

#include "optreg/core/error.hpp"
#include "optreg/core/matrix.hpp"
#include "optreg/core/qr.hpp"
#include "optreg/core/svd.hpp"
#include "optreg/gsvd.hpp"
#include "optreg/learn/error_measure.hpp"
#include "optreg/learn/multi.hpp"
#include "optreg/learn/scalar.hpp"
#include "optreg/learn/training_set.hpp"
#include "optreg/problems/generate.hpp"
#include "optreg/problems/io.hpp"
#include "optreg/problems/rng.hpp"
#include "optreg/problems/stats.hpp"
#include "optreg/select/classic.hpp"
#include "optreg/select/search.hpp"
#include "optreg/serialize.hpp"
#include "optreg/spectral/filter.hpp"
#include "optreg/spectral/optimal_error.hpp"
#include "optreg/structured/cg.hpp"
#include "optreg/structured/operator.hpp"
#include "optreg/structured/surrogate.hpp"
#include "optreg/structured/transform.hpp"
