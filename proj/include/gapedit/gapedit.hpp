#pragma once

#include "gapedit/edit_distance.hpp"
#include "gapedit/engine.hpp"
#include "gapedit/generators.hpp"
#include "gapedit/harness.hpp"
#include "gapedit/index_io.hpp"
#include "gapedit/matching_index.hpp"
#include "gapedit/precision_tree.hpp"
#include "gapedit/psl.hpp"
#include "gapedit/psl_harness.hpp"
#include "gapedit/random.hpp"
#include "gapedit/range_min.hpp"
#include "gapedit/shifted_distance_index.hpp"
#include "gapedit/text.hpp"
