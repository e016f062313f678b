#pragma once

#include "kcurve/error.hpp"
#include "kcurve/random.hpp"
#include "kcurve/harmonics.hpp"
#include "kcurve/profile.hpp"
#include "kcurve/quadrature.hpp"
#include "kcurve/rmt.hpp"
#include "kcurve/curves.hpp"
#include "kcurve/sim.hpp"
