#pragma once

#include "dpmpqp/errors.hpp"
#include "dpmpqp/types.hpp"
#include "dpmpqp/lp.hpp"
#include "dpmpqp/polytope.hpp"
#include "dpmpqp/model.hpp"
#include "dpmpqp/condense.hpp"
#include "dpmpqp/active_set.hpp"
#include "dpmpqp/certificates.hpp"
#include "dpmpqp/regions.hpp"
#include "dpmpqp/enumeration.hpp"
#include "dpmpqp/qp.hpp"
