#pragma once

#include "rlm/errors.hpp"
#include "rlm/model.hpp"
#include "rlm/element.hpp"
#include "rlm/mesh.hpp"
#include "rlm/assembly.hpp"
#include "rlm/field.hpp"
#include "rlm/banded.hpp"
#include "rlm/eigensolver.hpp"
#include "rlm/spectra.hpp"
#include "rlm/scattering.hpp"
#include "rlm/config.hpp"
#include "rlm/csv.hpp"
