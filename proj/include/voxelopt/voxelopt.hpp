#pragma once

#include "voxelopt/config.hpp"
#include "voxelopt/cost_volume.hpp"
#include "voxelopt/diffeo.hpp"
#include "voxelopt/entropy.hpp"
#include "voxelopt/feat_file.hpp"
#include "voxelopt/features.hpp"
#include "voxelopt/gaussian_filter.hpp"
#include "voxelopt/level_solver.hpp"
#include "voxelopt/metrics.hpp"
#include "voxelopt/nifti.hpp"
#include "voxelopt/parallel.hpp"
#include "voxelopt/pyramid.hpp"
#include "voxelopt/synth.hpp"
#include "voxelopt/types.hpp"
#include "voxelopt/volume_ops.hpp"
