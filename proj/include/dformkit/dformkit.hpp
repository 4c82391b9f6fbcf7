#pragma once

#include "dformkit/beurling_deny.hpp"
#include "dformkit/energy_measure.hpp"
#include "dformkit/errors.hpp"
#include "dformkit/forms.hpp"
#include "dformkit/gelfand.hpp"
#include "dformkit/markov.hpp"
#include "dformkit/sequences.hpp"
#include "dformkit/trace.hpp"
