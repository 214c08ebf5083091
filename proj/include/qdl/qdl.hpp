// Umbrella header.

#pragma once

#include "qdl/channels.hpp"
#include "qdl/codebook.hpp"
#include "qdl/common.hpp"
#include "qdl/info.hpp"
#include "qdl/moments.hpp"
#include "qdl/parallel.hpp"
#include "qdl/protocol.hpp"
#include "qdl/rates.hpp"
#include "qdl/rng.hpp"
#include "qdl/tensor.hpp"
