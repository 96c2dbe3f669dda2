#pragma once

// Monocular 2D-3D registration: estimate the full pose of a known
// triangulated model in a single photograph by minimizing an
// illumination-invariant covariance loss between the photo and a rasterized
// attribute image of the model.

#include "ilreg/covariance.hpp"
#include "ilreg/error.hpp"
#include "ilreg/estimate.hpp"
#include "ilreg/image.hpp"
#include "ilreg/landscape.hpp"
#include "ilreg/loss.hpp"
#include "ilreg/mask.hpp"
#include "ilreg/math.hpp"
#include "ilreg/mesh.hpp"
#include "ilreg/nelder_mead.hpp"
#include "ilreg/pose.hpp"
#include "ilreg/raster.hpp"
