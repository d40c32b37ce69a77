#pragma once

#include "chain.hpp"
#include "diagnostics.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "graph_io.hpp"
#include "ledger.hpp"
#include "mcmc.hpp"
#include "phylo/ising.hpp"
#include "phylo/network.hpp"
#include "phylo/trait_state.hpp"
#include "quantum.hpp"
#include "random.hpp"
#include "svg.hpp"
#include "trace_io.hpp"
