#pragma once

#include "bandfrac/band_fraction.hpp"
#include "bandfrac/banded.hpp"
#include "bandfrac/bidiag.hpp"
#include "bandfrac/core.hpp"
#include "bandfrac/engine.hpp"
#include "bandfrac/random.hpp"
#include "bandfrac/reduction.hpp"
#include "bandfrac/sysid.hpp"
#include "bandfrac/types.hpp"
#include "bandfrac/ymatrix.hpp"
