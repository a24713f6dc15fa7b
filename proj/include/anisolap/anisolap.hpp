#pragma once

#include "anisolap/analysis.hpp"
#include "anisolap/config.hpp"
#include "anisolap/evolve.hpp"
#include "anisolap/fields.hpp"
#include "anisolap/measures.hpp"
#include "anisolap/multistate.hpp"
#include "anisolap/realspace.hpp"
#include "anisolap/sampler.hpp"
#include "anisolap/symbols.hpp"
