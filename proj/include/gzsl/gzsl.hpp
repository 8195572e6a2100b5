#pragma once

#include "gzsl/attention.hpp"
#include "gzsl/autodiff.hpp"
#include "gzsl/checkpoint.hpp"
#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"
#include "gzsl/extractor.hpp"
#include "gzsl/graph.hpp"
#include "gzsl/linalg.hpp"
#include "gzsl/matrix.hpp"
#include "gzsl/model.hpp"
#include "gzsl/nn.hpp"
#include "gzsl/pbd.hpp"
#include "gzsl/pipeline.hpp"
#include "gzsl/rng.hpp"
#include "gzsl/stae.hpp"
#include "gzsl/synth.hpp"
#include "gzsl/trainer.hpp"
