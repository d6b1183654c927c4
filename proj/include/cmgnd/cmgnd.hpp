#ifndef CMGND_CMGND_HPP
#define CMGND_CMGND_HPP

#include "cmgnd/constraints.hpp"
#include "cmgnd/csv.hpp"
#include "cmgnd/ecm.hpp"
#include "cmgnd/errors.hpp"
#include "cmgnd/gnd.hpp"
#include "cmgnd/mixture.hpp"
#include "cmgnd/model_family.hpp"
#include "cmgnd/returns.hpp"
#include "cmgnd/rng.hpp"
#include "cmgnd/serialization.hpp"
#include "cmgnd/simulation.hpp"
#include "cmgnd/special_functions.hpp"

#endif  // CMGND_CMGND_HPP
