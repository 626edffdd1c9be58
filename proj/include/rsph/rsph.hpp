#pragma once

#include <rsph/bench/grid.hpp>
#include <rsph/bench/reversal.hpp>
#include <rsph/bench/runner.hpp>
#include <rsph/bench/scenarios.hpp>
#include <rsph/config.hpp>
#include <rsph/error.hpp>
#include <rsph/fixed_point.hpp>
#include <rsph/integrate.hpp>
#include <rsph/io/checkpoint.hpp>
#include <rsph/io/config_file.hpp>
#include <rsph/io/csv.hpp>
#include <rsph/isc.hpp>
#include <rsph/kernel.hpp>
#include <rsph/krylov.hpp>
#include <rsph/neighbors.hpp>
#include <rsph/parallel.hpp>
#include <rsph/particles.hpp>
#include <rsph/sph.hpp>
#include <rsph/thermo.hpp>
#include <rsph/vec2.hpp>
