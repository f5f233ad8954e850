#pragma once

#include "canvas.hpp"
#include "chaining.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "free_energy.hpp"
#include "kohonen.hpp"
#include "learner.hpp"
#include "pgm.hpp"
#include "repertoire_file.hpp"
#include "reservoir.hpp"
#include "rng.hpp"
