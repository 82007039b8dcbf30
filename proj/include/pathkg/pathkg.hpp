#pragma once
// Convenience include for the whole library.

#include "pathkg/checkpoint.hpp"
#include "pathkg/config.hpp"
#include "pathkg/converter.hpp"
#include "pathkg/encoder.hpp"
#include "pathkg/error.hpp"
#include "pathkg/evaluator.hpp"
#include "pathkg/graph.hpp"
#include "pathkg/math.hpp"
#include "pathkg/model.hpp"
#include "pathkg/paths.hpp"
#include "pathkg/rules.hpp"
#include "pathkg/trainer.hpp"
#include "pathkg/types.hpp"
