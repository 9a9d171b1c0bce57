#pragma once

#include "matgame/core.hpp"
#include "matgame/rng.hpp"
#include "matgame/geometry.hpp"
#include "matgame/svd.hpp"
#include "matgame/oracle.hpp"
#include "matgame/judges.hpp"
#include "matgame/inner.hpp"
#include "matgame/l2l2.hpp"
#include "matgame/smsolver.hpp"
#include "matgame/outer.hpp"
#include "matgame/baselines.hpp"
#include "matgame/instances.hpp"
#include "matgame/bench.hpp"
