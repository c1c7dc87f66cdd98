#pragma once

#include "evtrig/certificates.hpp"
#include "evtrig/config.hpp"
#include "evtrig/dynamics.hpp"
#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"
#include "evtrig/manifold.hpp"
#include "evtrig/models.hpp"
#include "evtrig/poly_manifold.hpp"
#include "evtrig/report.hpp"
#include "evtrig/series.hpp"
#include "evtrig/sim.hpp"
#include "evtrig/trigger.hpp"
