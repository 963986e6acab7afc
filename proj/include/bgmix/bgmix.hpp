#pragma once

#include "image.hpp"
#include "png_io.hpp"
#include "rng.hpp"
#include "compositing.hpp"
#include "augment.hpp"
#include "mix.hpp"
#include "ssim.hpp"
#include "features.hpp"
#include "losses.hpp"
#include "detector.hpp"
#include "metrics.hpp"
#include "dataset.hpp"
#include "dataset_io.hpp"
#include "trainer.hpp"
#include "serialize.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "preview.hpp"
