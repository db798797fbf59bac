#pragma once

#include "cla/community.hpp"
#include "cla/config.hpp"
#include "cla/dataset.hpp"
#include "cla/edit_distance.hpp"
#include "cla/error.hpp"
#include "cla/eval.hpp"
#include "cla/game.hpp"
#include "cla/inference.hpp"
#include "cla/message.hpp"
#include "cla/policy.hpp"
#include "cla/rng.hpp"
#include "cla/semantics.hpp"
#include "cla/trajectory.hpp"
#include "cla/transport.hpp"
#include "cla/verify.hpp"
