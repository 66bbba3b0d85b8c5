#pragma once

#include "sdseq/core.hpp"
#include "sdseq/fsd.hpp"
#include "sdseq/weighting.hpp"
#include "sdseq/orders.hpp"
#include "sdseq/subexp.hpp"
#include "sdseq/affirm.hpp"
#include "sdseq/engine.hpp"
#include "sdseq/simlab.hpp"
