#pragma once

// Umbrella header for the ratdiff library.

#include "ratdiff/equation.hpp"
#include "ratdiff/errors.hpp"
#include "ratdiff/forbidden.hpp"
#include "ratdiff/semiconjugacy.hpp"
#include "ratdiff/stability.hpp"
