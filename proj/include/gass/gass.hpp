#pragma once

// Everything: geometry, scoring, expansion, volume checks, the toy sampler
// and the file formats.

#include "gass/diversity.hpp"
#include "gass/embed_proxy.hpp"
#include "gass/error.hpp"
#include "gass/expansion.hpp"
#include "gass/guidance.hpp"
#include "gass/io/canonical_json.hpp"
#include "gass/io/config.hpp"
#include "gass/io/jsonl.hpp"
#include "gass/io/manifest.hpp"
#include "gass/io/report.hpp"
#include "gass/io/svg.hpp"
#include "gass/mixture.hpp"
#include "gass/random.hpp"
#include "gass/sphere.hpp"
#include "gass/toy_t2i.hpp"
#include "gass/verifiers.hpp"
#include "gass/volume.hpp"
