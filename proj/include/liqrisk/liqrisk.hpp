#pragma once

// Everything at once.

#include "numeric.hpp"
#include "convex_core.hpp"
#include "measures.hpp"
#include "risk.hpp"
#include "profiles.hpp"
#include "duality.hpp"
#include "concentration.hpp"
#include "transport.hpp"
#include "options.hpp"
#include "io.hpp"
