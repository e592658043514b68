#pragma once

#include "overtake/config.hpp"
#include "overtake/errors.hpp"
#include "overtake/harness.hpp"
#include "overtake/highway_env.hpp"
#include "overtake/io.hpp"
#include "overtake/kinematics.hpp"
#include "overtake/q_table.hpp"
#include "overtake/rng.hpp"
#include "overtake/td_learning.hpp"
#include "overtake/trainer.hpp"
#include "overtake/trends.hpp"
