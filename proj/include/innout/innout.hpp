#pragma once

#include "innout/conditioning.hpp"
#include "innout/config.hpp"
#include "innout/curation.hpp"
#include "innout/cycle.hpp"
#include "innout/error.hpp"
#include "innout/identity.hpp"
#include "innout/manifest.hpp"
#include "innout/metrics.hpp"
#include "innout/miner.hpp"
#include "innout/pipeline.hpp"
#include "innout/rle.hpp"
#include "innout/rng.hpp"
#include "innout/types.hpp"
