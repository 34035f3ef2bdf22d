#pragma once

#include "gmtlab/common.hpp"
#include "gmtlab/io.hpp"
#include "gmtlab/kplane.hpp"
#include "gmtlab/measures.hpp"
#include "gmtlab/parallel.hpp"
#include "gmtlab/projections.hpp"
#include "gmtlab/rng.hpp"
#include "gmtlab/slope_fit.hpp"
#include "gmtlab/spectral.hpp"
#include "gmtlab/unions.hpp"
