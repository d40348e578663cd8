#pragma once

#include <cstdint>

#include "microplan/grid_model.hpp"

namespace microplan {

// IEEE 33-bus feeder with the candidate DER/line sets used throughout the
// CLI. Profiles are synthetic and fully determined by profile_seed; the
// shapes are documented in docs/case_format.md.
PlanningProblem builtin_case33(std::uint64_t profile_seed, int rep_days_per_year,
                               int horizon_years);

// Small radial fixture: 4 buses, one existing and two candidate lines, one
// two-site dispatchable DG and one storage candidate, one four-hour
// representative day, one islanding scenario. Sized so exhaustive
// enumeration stays instant.
PlanningProblem toy4_case();

}  // namespace microplan
