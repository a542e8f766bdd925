#pragma once

#include "phasefuse/asymptotics.hpp"
#include "phasefuse/channel.hpp"
#include "phasefuse/error.hpp"
#include "phasefuse/estimator.hpp"
#include "phasefuse/io.hpp"
#include "phasefuse/montecarlo.hpp"
#include "phasefuse/phase_opt.hpp"
#include "phasefuse/phase_vector.hpp"
#include "phasefuse/rng.hpp"
#include "phasefuse/sdp.hpp"
