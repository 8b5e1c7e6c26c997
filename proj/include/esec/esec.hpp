#pragma once
// Umbrella header.

#include "esec/core.hpp"
#include "esec/eval.hpp"
#include "esec/event_chain.hpp"
#include "esec/explanation.hpp"
#include "esec/geometry.hpp"
#include "esec/io.hpp"
#include "esec/noise.hpp"
#include "esec/pipeline.hpp"
#include "esec/primitives.hpp"
#include "esec/rng.hpp"
#include "esec/semantics.hpp"
#include "esec/simulator.hpp"
