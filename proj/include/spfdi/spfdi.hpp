#pragma once

#include "spfdi/errors.hpp"
#include "spfdi/linalg.hpp"
#include "spfdi/specfun.hpp"
#include "spfdi/model.hpp"
#include "spfdi/estimator.hpp"
#include "spfdi/detector.hpp"
#include "spfdi/attack.hpp"
#include "spfdi/analysis.hpp"
#include "spfdi/harness.hpp"
#include "spfdi/reproduce.hpp"
