// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "xalign/aligner.hpp"
#include "xalign/analysis.hpp"
#include "xalign/linalg.hpp"
#include "xalign/model.hpp"
#include "xalign/random.hpp"
#include "xalign/receiver.hpp"
#include "xalign/report_io.hpp"
#include "xalign/scheme.hpp"
