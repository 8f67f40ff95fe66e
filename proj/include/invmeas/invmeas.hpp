#pragma once

#include "rational.hpp"
#include "interval.hpp"
#include "oracle.hpp"
#include "space.hpp"
#include "enclosure.hpp"
#include "measure.hpp"
#include "wasserstein.hpp"
#include "transport_lp.hpp"
#include "measure_net.hpp"
#include "regularity.hpp"
#include "support.hpp"
#include "map_model.hpp"
#include "maps.hpp"
#include "pushforward.hpp"
#include "localizer.hpp"
#include "counterexamples.hpp"
