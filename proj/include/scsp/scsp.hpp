// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "scsp/rational.hpp"
#include "scsp/model.hpp"
#include "scsp/lexer.hpp"
#include "scsp/parser.hpp"
#include "scsp/lower.hpp"
#include "scsp/printer.hpp"
#include "scsp/scenario_tree.hpp"
#include "scsp/flat_csp.hpp"
#include "scsp/compiler.hpp"
#include "scsp/solver.hpp"
#include "scsp/oracle.hpp"
#include "scsp/pipeline.hpp"
