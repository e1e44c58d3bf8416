#pragma once

#include "wheatfx/binary_features.hpp"
#include "wheatfx/components.hpp"
#include "wheatfx/config.hpp"
#include "wheatfx/dataset.hpp"
#include "wheatfx/ensemble.hpp"
#include "wheatfx/error.hpp"
#include "wheatfx/features.hpp"
#include "wheatfx/forest.hpp"
#include "wheatfx/gbm.hpp"
#include "wheatfx/image_io.hpp"
#include "wheatfx/imaging.hpp"
#include "wheatfx/logistic.hpp"
#include "wheatfx/metrics.hpp"
#include "wheatfx/model.hpp"
#include "wheatfx/pipeline.hpp"
#include "wheatfx/rng.hpp"
#include "wheatfx/segmentation.hpp"
#include "wheatfx/serialization.hpp"
#include "wheatfx/synthetic.hpp"
#include "wheatfx/texture.hpp"
#include "wheatfx/tree.hpp"
