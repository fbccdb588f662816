#pragma once

#include "bounds.hpp"
#include "classical.hpp"
#include "estimation.hpp"
#include "io.hpp"
#include "matcore.hpp"
#include "numerics.hpp"
#include "oracle.hpp"
#include "quantum.hpp"
#include "random.hpp"
