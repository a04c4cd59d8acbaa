#pragma once

#include "vqaud/linalg.hpp"
#include "vqaud/rng.hpp"
#include "vqaud/lindblad.hpp"
#include "vqaud/circuit.hpp"
#include "vqaud/optimizer.hpp"
#include "vqaud/dilation.hpp"
#include "vqaud/estimators.hpp"
#include "vqaud/kraus.hpp"
#include "vqaud/io.hpp"
#include "vqaud/experiments.hpp"
