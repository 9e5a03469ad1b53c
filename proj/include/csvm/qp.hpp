#pragma once

#include "csvm/qp/assemble.hpp"
#include "csvm/qp/kkt.hpp"
#include "csvm/qp/problem.hpp"
#include "csvm/qp/solver.hpp"
