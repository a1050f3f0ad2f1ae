#pragma once

#include "srms/errors.hpp"
#include "srms/experiments.hpp"
#include "srms/extremes.hpp"
#include "srms/manifest.hpp"
#include "srms/parallel.hpp"
#include "srms/pathsim.hpp"
#include "srms/renewal.hpp"
#include "srms/rng.hpp"
#include "srms/special.hpp"
#include "srms/stats.hpp"
#include "srms/theory.hpp"
#include "srms/version.hpp"
