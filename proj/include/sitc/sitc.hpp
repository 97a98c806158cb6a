#pragma once

#include "sitc/error.hpp"
#include "sitc/random.hpp"
#include "sitc/parallel.hpp"
#include "sitc/graph.hpp"
#include "sitc/categorize.hpp"
#include "sitc/centrality.hpp"
#include "sitc/embedding.hpp"
#include "sitc/measures.hpp"
#include "sitc/boosting.hpp"
#include "sitc/outcome.hpp"
#include "sitc/recommend.hpp"
#include "sitc/eventsim.hpp"
#include "sitc/analyze.hpp"
#include "sitc/config.hpp"
