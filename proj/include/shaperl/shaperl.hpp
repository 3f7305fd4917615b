#pragma once

#include "shaperl/actor_critic.hpp"
#include "shaperl/checks.hpp"
#include "shaperl/core.hpp"
#include "shaperl/gaussian.hpp"
#include "shaperl/gridworld.hpp"
#include "shaperl/harness.hpp"
#include "shaperl/mlp.hpp"
#include "shaperl/mountain_car.hpp"
#include "shaperl/oracle.hpp"
#include "shaperl/rng.hpp"
#include "shaperl/shaping.hpp"
#include "shaperl/soft_q.hpp"
