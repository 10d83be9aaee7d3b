#ifndef PCS_PCS_HPP
#define PCS_PCS_HPP

#include "pcs/baselines.hpp"
#include "pcs/casestudy.hpp"
#include "pcs/chisq.hpp"
#include "pcs/csv.hpp"
#include "pcs/dataset.hpp"
#include "pcs/fastpcs.hpp"
#include "pcs/moments.hpp"
#include "pcs/parallel.hpp"
#include "pcs/rng.hpp"
#include "pcs/sim_config.hpp"
#include "pcs/simlab.hpp"
#include "pcs/sweep.hpp"

#endif
