#pragma once

// Umbrella header: motion magnification, tremor detection, synthetic
// verification and report serialization for bedside infant monitoring video.

#include "tremorscope/color.hpp"
#include "tremorscope/detector.hpp"
#include "tremorscope/magnifier.hpp"
#include "tremorscope/pyramid.hpp"
#include "tremorscope/report.hpp"
#include "tremorscope/run_config.hpp"
#include "tremorscope/synth.hpp"
#include "tremorscope/temporal_filter.hpp"
#include "tremorscope/types.hpp"
#include "tremorscope/video_io.hpp"
