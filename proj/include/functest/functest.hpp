#pragma once

// Core library. The JSON/CLI layer (io.hpp, config.hpp, cli.hpp) additionally
// needs nlohmann/json and CLI11 on the include path.
#include "functest/curves.hpp"
#include "functest/error.hpp"
#include "functest/functionals.hpp"
#include "functest/functions.hpp"
#include "functest/ks.hpp"
#include "functest/lan.hpp"
#include "functest/mc.hpp"
#include "functest/measures.hpp"
#include "functest/normal.hpp"
#include "functest/parallel.hpp"
#include "functest/quadrature.hpp"
#include "functest/random.hpp"
#include "functest/testing.hpp"
