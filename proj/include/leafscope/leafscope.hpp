#pragma once

#include "leafscope/error.hpp"
#include "leafscope/focus.hpp"
#include "leafscope/geom.hpp"
#include "leafscope/isolate.hpp"
#include "leafscope/pipeline.hpp"
#include "leafscope/report.hpp"
#include "leafscope/scene.hpp"
#include "leafscope/scene_io.hpp"
#include "leafscope/spectral.hpp"
#include "leafscope/steer.hpp"
