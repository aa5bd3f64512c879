#pragma once

#include "tikhreg/error.hpp"
#include "tikhreg/experiments.hpp"
#include "tikhreg/linalg.hpp"
#include "tikhreg/param_select.hpp"
#include "tikhreg/prob_io.hpp"
#include "tikhreg/problems.hpp"
#include "tikhreg/report.hpp"
#include "tikhreg/rng.hpp"
#include "tikhreg/spectral.hpp"
#include "tikhreg/stats.hpp"
#include "tikhreg/tikhonov.hpp"

namespace tikhreg {
inline constexpr const char* kVersion = "0.1.0";
}
