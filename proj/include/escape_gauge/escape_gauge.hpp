#pragma once

#include "escape_gauge/counting.hpp"
#include "escape_gauge/cover.hpp"
#include "escape_gauge/errors.hpp"
#include "escape_gauge/fit.hpp"
#include "escape_gauge/gauge.hpp"
#include "escape_gauge/growth.hpp"
#include "escape_gauge/meromap.hpp"
#include "escape_gauge/quadrature.hpp"
#include "escape_gauge/rng.hpp"
#include "escape_gauge/tower.hpp"
