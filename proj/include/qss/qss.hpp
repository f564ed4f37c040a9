#pragma once

#include "qss/error.hpp"
#include "qss/numerics.hpp"
#include "qss/special.hpp"
#include "qss/interpolation.hpp"
#include "qss/model.hpp"
#include "qss/spectra.hpp"
#include "qss/forward.hpp"
#include "qss/inverse.hpp"
#include "qss/reconstruct.hpp"
#include "qss/ingest.hpp"
#include "qss/commands.hpp"
