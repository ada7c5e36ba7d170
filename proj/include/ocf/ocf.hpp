#pragma once

#include "ocf/error.hpp"
#include "ocf/bigint.hpp"
#include "ocf/qfield.hpp"
#include "ocf/mat2.hpp"
#include "ocf/cf.hpp"
#include "ocf/matword.hpp"
#include "ocf/enumerate.hpp"
#include "ocf/analytic.hpp"
#include "ocf/equidist.hpp"
