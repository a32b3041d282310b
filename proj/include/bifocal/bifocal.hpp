#pragma once

// Fragment-level bidirectional image-text matching: focal attention over
// cross-modal fragments, pair scoring, hard-negative triplet training of
// linear projections, synthetic labelled corpora, and retrieval metrics.
// manifest.hpp is excluded: it needs libcrypto and only the tools use it.

#include "bifocal/errors.hpp"
#include "bifocal/rng.hpp"
#include "bifocal/matrix.hpp"
#include "bifocal/binio.hpp"
#include "bifocal/fragments.hpp"
#include "bifocal/attention.hpp"
#include "bifocal/relevance.hpp"
#include "bifocal/training.hpp"
#include "bifocal/synthdata.hpp"
#include "bifocal/eval.hpp"
#include "bifocal/serialize.hpp"
