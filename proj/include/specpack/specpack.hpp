#pragma once

#include "specpack/domains.hpp"
#include "specpack/errors.hpp"
#include "specpack/geometry.hpp"
#include "specpack/mmspace.hpp"
#include "specpack/packing.hpp"
#include "specpack/pipeline.hpp"
#include "specpack/rayleigh.hpp"
#include "specpack/report.hpp"
#include "specpack/spectrum.hpp"
