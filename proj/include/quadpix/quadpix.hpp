// Umbrella include.
#pragma once

#include "quadpix/common.hpp"
#include "quadpix/consensus.hpp"
#include "quadpix/experiment_config.hpp"
#include "quadpix/experiments.hpp"
#include "quadpix/feature_store.hpp"
#include "quadpix/filter_bank.hpp"
#include "quadpix/fourier.hpp"
#include "quadpix/hog.hpp"
#include "quadpix/image.hpp"
#include "quadpix/image_io.hpp"
#include "quadpix/margin.hpp"
#include "quadpix/procedural.hpp"
#include "quadpix/projection.hpp"
#include "quadpix/quad.hpp"
#include "quadpix/svm.hpp"
#include "quadpix/synth.hpp"
