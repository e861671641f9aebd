#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bornlab/born_dt.hpp"

TEST_CASE("placeholder") { CHECK(true); }
