#pragma once

// Everything: numerics, degradation, Wiener layer, learned prior, unrolled
// solver, training and metrics.

#include "srwd/conv.hpp"
#include "srwd/dataset.hpp"
#include "srwd/degradation.hpp"
#include "srwd/error.hpp"
#include "srwd/fft.hpp"
#include "srwd/image_io.hpp"
#include "srwd/metrics.hpp"
#include "srwd/numerics.hpp"
#include "srwd/parallel.hpp"
#include "srwd/prior.hpp"
#include "srwd/random.hpp"
#include "srwd/solver.hpp"
#include "srwd/tensor.hpp"
#include "srwd/training.hpp"
#include "srwd/wiener.hpp"
