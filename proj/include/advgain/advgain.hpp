#pragma once

#include "advgain/bootstrap.hpp"
#include "advgain/corpus.hpp"
#include "advgain/embedding.hpp"
#include "advgain/error.hpp"
#include "advgain/gain.hpp"
#include "advgain/metrics.hpp"
#include "advgain/report.hpp"
