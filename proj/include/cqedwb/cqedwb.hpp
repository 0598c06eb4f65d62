#pragma once

#include "cavity.hpp"
#include "constants.hpp"
#include "cqedspec.hpp"
#include "error.hpp"
#include "fluxdesign.hpp"
#include "numkit.hpp"
#include "pulsectl.hpp"
#include "qec.hpp"
#include "readout.hpp"
#include "tomo.hpp"
#include "transmon.hpp"
