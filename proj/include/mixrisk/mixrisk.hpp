#pragma once

#include "mixrisk/aggregation.hpp"
#include "mixrisk/errors.hpp"
#include "mixrisk/es.hpp"
#include "mixrisk/generator.hpp"
#include "mixrisk/mc_oracle.hpp"
#include "mixrisk/model.hpp"
#include "mixrisk/paper_tables.hpp"
#include "mixrisk/philox.hpp"
#include "mixrisk/quadrature.hpp"
#include "mixrisk/roots.hpp"
#include "mixrisk/specfun.hpp"
#include "mixrisk/var.hpp"
