#include <catch2/catch_amalgamated.hpp>
#include "quadpix/quadpix.hpp"
