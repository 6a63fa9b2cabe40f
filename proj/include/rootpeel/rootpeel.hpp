#pragma once

#include "rootpeel/error.hpp"
#include "rootpeel/experiment.hpp"
#include "rootpeel/io.hpp"
#include "rootpeel/kdtree.hpp"
#include "rootpeel/linalg/field.hpp"
#include "rootpeel/linalg/matrix.hpp"
#include "rootpeel/linalg/module.hpp"
#include "rootpeel/oracle.hpp"
#include "rootpeel/pset.hpp"
#include "rootpeel/rng.hpp"
#include "rootpeel/rooted.hpp"
#include "rootpeel/space.hpp"
