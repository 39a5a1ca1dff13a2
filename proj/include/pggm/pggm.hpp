#ifndef PGGM_PGGM_HPP
#define PGGM_PGGM_HPP

#include "pggm/conditionals.hpp"
#include "pggm/diagnostics.hpp"
#include "pggm/distributions.hpp"
#include "pggm/errors.hpp"
#include "pggm/evaluation.hpp"
#include "pggm/experiment.hpp"
#include "pggm/gibbs.hpp"
#include "pggm/io.hpp"
#include "pggm/mgig.hpp"
#include "pggm/model.hpp"
#include "pggm/oracle.hpp"
#include "pggm/random.hpp"
#include "pggm/reductions.hpp"
#include "pggm/scenarios.hpp"
#include "pggm/tuning.hpp"

#endif  // PGGM_PGGM_HPP
