#pragma once

#include "roc_pose/error.hpp"
#include "roc_pose/frame.hpp"
#include "roc_pose/geometry.hpp"
#include "roc_pose/image.hpp"
#include "roc_pose/image_io.hpp"
#include "roc_pose/metrics.hpp"
#include "roc_pose/multiview.hpp"
#include "roc_pose/parallel.hpp"
#include "roc_pose/pipeline.hpp"
#include "roc_pose/predictor.hpp"
#include "roc_pose/random.hpp"
#include "roc_pose/report.hpp"
#include "roc_pose/roc.hpp"
#include "roc_pose/scenes.hpp"
#include "roc_pose/solvers.hpp"
#include "roc_pose/tracking.hpp"
