#pragma once

#include "druin/distributions.hpp"
#include "druin/errors.hpp"
#include "druin/exact_ruin.hpp"
#include "druin/job.hpp"
#include "druin/mixing.hpp"
#include "druin/mp_ruin.hpp"
#include "druin/nbm_ruin.hpp"
#include "druin/numeric.hpp"
#include "druin/pk_eval.hpp"
#include "druin/rng.hpp"
#include "druin/simulator.hpp"
#include "druin/table.hpp"
