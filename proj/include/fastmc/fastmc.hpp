#pragma once

#include "fastmc/config.hpp"
#include "fastmc/csv.hpp"
#include "fastmc/dataset.hpp"
#include "fastmc/engine.hpp"
#include "fastmc/error.hpp"
#include "fastmc/external.hpp"
#include "fastmc/identify.hpp"
#include "fastmc/ito_model.hpp"
#include "fastmc/model_file.hpp"
#include "fastmc/parallel.hpp"
#include "fastmc/polynomial.hpp"
#include "fastmc/report.hpp"
#include "fastmc/rng.hpp"
#include "fastmc/sampling.hpp"
#include "fastmc/sde_sim.hpp"
#include "fastmc/spectral.hpp"
#include "fastmc/system_sim.hpp"
