#pragma once

#include "mevgen/errors.hpp"
#include "mevgen/matrix.hpp"
#include "mevgen/model.hpp"
#include "mevgen/synthesis.hpp"
#include "mevgen/sampling.hpp"
#include "mevgen/estimation.hpp"
