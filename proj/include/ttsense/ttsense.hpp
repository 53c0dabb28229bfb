#pragma once

#include "ttsense/baselines.hpp"
#include "ttsense/blackbox.hpp"
#include "ttsense/cross.hpp"
#include "ttsense/errors.hpp"
#include "ttsense/masks.hpp"
#include "ttsense/maxvol.hpp"
#include "ttsense/metrics.hpp"
#include "ttsense/model_space.hpp"
#include "ttsense/report_io.hpp"
#include "ttsense/sobol_tt.hpp"
#include "ttsense/subprocess.hpp"
#include "ttsense/tt_io.hpp"
#include "ttsense/tt_tensor.hpp"

#define TTSENSE_VERSION "0.1.0"
