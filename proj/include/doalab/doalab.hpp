// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "doalab/errors.hpp"
#include "doalab/linalg.hpp"
#include "doalab/scenario.hpp"
#include "doalab/fastgrid.hpp"
#include "doalab/subspace.hpp"
#include "doalab/greedy.hpp"
#include "doalab/gimusic.hpp"
#include "doalab/order.hpp"
#include "doalab/eval.hpp"
#include "doalab/bench.hpp"
