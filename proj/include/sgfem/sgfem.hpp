#pragma once

#include "sgfem/linalg.hpp"
#include "sgfem/matrix_market.hpp"
#include "sgfem/chaos_basis.hpp"
#include "sgfem/fem.hpp"
#include "sgfem/random_field.hpp"
#include "sgfem/galerkin_operator.hpp"
#include "sgfem/problem.hpp"
#include "sgfem/krylov.hpp"
#include "sgfem/preconditioners.hpp"
#include "sgfem/experiments.hpp"
