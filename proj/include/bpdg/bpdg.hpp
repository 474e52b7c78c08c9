#pragma once

#include "basis.hpp"
#include "collision.hpp"
#include "config.hpp"
#include "constants.hpp"
#include "device.hpp"
#include "mesh.hpp"
#include "moments.hpp"
#include "output.hpp"
#include "poisson.hpp"
#include "quadrature.hpp"
#include "quadtables.hpp"
#include "stepper.hpp"
#include "transport.hpp"
