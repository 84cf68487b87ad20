#pragma once

#include "wow/bench.hpp"
#include "wow/cloud.hpp"
#include "wow/config.hpp"
#include "wow/couplings.hpp"
#include "wow/data.hpp"
#include "wow/errors.hpp"
#include "wow/eval.hpp"
#include "wow/flow.hpp"
#include "wow/linearized.hpp"
#include "wow/net.hpp"
#include "wow/ot.hpp"
#include "wow/parallel.hpp"
#include "wow/rng.hpp"
#include "wow/sliced.hpp"
