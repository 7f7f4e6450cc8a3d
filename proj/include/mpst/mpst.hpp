#pragma once

#include "mpst/ast.hpp"
#include "mpst/context.hpp"
#include "mpst/interp.hpp"
#include "mpst/parser.hpp"
#include "mpst/print.hpp"
#include "mpst/safety.hpp"
#include "mpst/strategy.hpp"
#include "mpst/subtype.hpp"
#include "mpst/tsem.hpp"
#include "mpst/typecheck.hpp"
