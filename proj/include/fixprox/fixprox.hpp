#ifndef FIXPROX_FIXPROX_HPP
#define FIXPROX_FIXPROX_HPP

#include "fixprox/bench.hpp"
#include "fixprox/errors.hpp"
#include "fixprox/functions.hpp"
#include "fixprox/io.hpp"
#include "fixprox/operators.hpp"
#include "fixprox/schedules.hpp"
#include "fixprox/solvers.hpp"
#include "fixprox/vecspace.hpp"

#endif  // FIXPROX_FIXPROX_HPP
