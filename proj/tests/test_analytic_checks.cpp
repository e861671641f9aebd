#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bornlab/analytic_checks.hpp"

TEST_CASE("placeholder") { CHECK(true); }
